#include "rulecg/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace rulecg {

int LinearProgram::add_variable(double lower, double upper, double cost, std::string name) {
  variables.push_back({lower, upper, cost, std::move(name)});
  return static_cast<int>(variables.size()) - 1;
}

int LinearProgram::add_row(RowSense sense, double rhs, std::vector<Entry> entries, std::string name) {
  rows.push_back({std::move(entries), sense, rhs, std::move(name)});
  return static_cast<int>(rows.size()) - 1;
}

int LinearProgram::add_column(double lower, double upper, double cost,
                              const std::vector<Entry>& row_entries, std::string name) {
  const int var = add_variable(lower, upper, cost, std::move(name));
  for (const auto& e : row_entries) {
    if (e.index < 0 || static_cast<std::size_t>(e.index) >= rows.size()) {
      throw std::invalid_argument("column entry references unknown row");
    }
    rows[static_cast<std::size_t>(e.index)].entries.push_back({var, e.value});
  }
  return var;
}

void LinearProgram::validate() const {
  for (std::size_t j = 0; j < variables.size(); ++j) {
    const auto& v = variables[j];
    if (!std::isfinite(v.lower) || std::isnan(v.upper) || v.lower > v.upper || !std::isfinite(v.cost)) {
      throw std::invalid_argument("variable " + std::to_string(j) + " has invalid bounds or cost");
    }
  }
  std::vector<std::size_t> seen(variables.size(), rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!std::isfinite(rows[r].rhs)) throw std::invalid_argument("row " + std::to_string(r) + " rhs");
    for (const auto& e : rows[r].entries) {
      if (e.index < 0 || static_cast<std::size_t>(e.index) >= variables.size()) {
        throw std::invalid_argument("row " + std::to_string(r) + " references unknown variable");
      }
      if (seen[static_cast<std::size_t>(e.index)] == r) {
        throw std::invalid_argument("row " + std::to_string(r) + " has a duplicate entry");
      }
      seen[static_cast<std::size_t>(e.index)] = r;
    }
  }
}

double LinearProgram::objective(const std::vector<double>& x) const {
  double z = 0.0;
  for (std::size_t j = 0; j < variables.size(); ++j) z += variables[j].cost * x[j];
  return z;
}

double LinearProgram::row_activity(std::size_t r, const std::vector<double>& x) const {
  double a = 0.0;
  for (const auto& e : rows[r].entries) a += e.value * x[static_cast<std::size_t>(e.index)];
  return a;
}

namespace {

std::string var_name(const LinearProgram& lp, std::size_t j) {
  return lp.variables[j].name.empty() ? "x" + std::to_string(j) : lp.variables[j].name;
}

void write_coef(std::ostream& out, double v, const std::string& name) {
  out << ' ' << (v < 0 ? '-' : '+') << ' ' << std::abs(v) << ' ' << name;
}

}  // namespace

void write_lp(const LinearProgram& lp, std::ostream& out) {
  out << "minimize\n  obj:";
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    if (lp.variables[j].cost != 0.0) write_coef(out, lp.variables[j].cost, var_name(lp, j));
  }
  out << "\nsubject to\n";
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    out << "  " << (row.name.empty() ? "r" + std::to_string(r) : row.name) << ':';
    for (const auto& e : row.entries) write_coef(out, e.value, var_name(lp, static_cast<std::size_t>(e.index)));
    out << (row.sense == RowSense::kGreaterEqual ? " >= " : row.sense == RowSense::kLessEqual ? " <= " : " = ")
        << row.rhs << '\n';
  }
  out << "bounds\n";
  for (std::size_t j = 0; j < lp.variables.size(); ++j) {
    out << "  " << lp.variables[j].lower << " <= " << var_name(lp, j) << " <= ";
    if (std::isinf(lp.variables[j].upper)) {
      out << "inf\n";
    } else {
      out << lp.variables[j].upper << '\n';
    }
  }
  out << "end\n";
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration-limit";
  }
  return "?";
}

// Internal variable numbering: slacks 0..m-1 (row r: a_r x + s_r = b_r),
// then structurals m..m+n-1.
struct SimplexSolver::Impl {
  using SpMat = Eigen::SparseMatrix<double>;
  using Vec = Eigen::VectorXd;

  struct Eta {
    int pivot = 0;
    std::vector<std::pair<int, double>> column;  // nonzeros of B^{-1} a_q
    double pivot_value = 1.0;
  };

  int m = 0;
  std::vector<double> lower, upper, cost, x;
  std::vector<BasisStatus> status;
  std::vector<std::vector<std::pair<int, double>>> cols;  // structural columns only
  std::vector<double> rhs;
  std::vector<int> head;  // basis position -> internal variable
  std::vector<int> pos;   // internal variable -> basis position or -1

  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu;
  std::vector<Eta> etas;
  bool factor_valid = false;
  bool values_valid = false;

  int num_vars() const { return static_cast<int>(lower.size()); }

  void load(const LinearProgram& lp) {
    m = static_cast<int>(lp.rows.size());
    const int n = static_cast<int>(lp.variables.size());
    lower.assign(static_cast<std::size_t>(m + n), 0.0);
    upper.assign(static_cast<std::size_t>(m + n), 0.0);
    cost.assign(static_cast<std::size_t>(m + n), 0.0);
    x.assign(static_cast<std::size_t>(m + n), 0.0);
    status.assign(static_cast<std::size_t>(m + n), BasisStatus::kAtLower);
    rhs.resize(static_cast<std::size_t>(m));
    cols.assign(static_cast<std::size_t>(n), {});
    for (int r = 0; r < m; ++r) {
      const auto& row = lp.rows[static_cast<std::size_t>(r)];
      rhs[static_cast<std::size_t>(r)] = row.rhs;
      switch (row.sense) {
        case RowSense::kGreaterEqual:
          lower[static_cast<std::size_t>(r)] = -kInfinity;
          upper[static_cast<std::size_t>(r)] = 0.0;
          break;
        case RowSense::kLessEqual:
          lower[static_cast<std::size_t>(r)] = 0.0;
          upper[static_cast<std::size_t>(r)] = kInfinity;
          break;
        case RowSense::kEqual:
          break;
      }
      for (const auto& e : row.entries) {
        cols[static_cast<std::size_t>(e.index)].emplace_back(r, e.value);
      }
    }
    for (int j = 0; j < n; ++j) {
      const auto& v = lp.variables[static_cast<std::size_t>(j)];
      const auto k = static_cast<std::size_t>(m + j);
      lower[k] = v.lower;
      upper[k] = v.upper;
      cost[k] = v.cost;
      status[k] = BasisStatus::kAtLower;
      x[k] = v.lower;
    }
    slack_basis();
  }

  void slack_basis() {
    head.resize(static_cast<std::size_t>(m));
    pos.assign(static_cast<std::size_t>(num_vars()), -1);
    for (int r = 0; r < m; ++r) {
      head[static_cast<std::size_t>(r)] = r;
      pos[static_cast<std::size_t>(r)] = r;
      status[static_cast<std::size_t>(r)] = BasisStatus::kBasic;
    }
    for (int k = m; k < num_vars(); ++k) {
      auto& s = status[static_cast<std::size_t>(k)];
      if (s == BasisStatus::kBasic) s = BasisStatus::kAtLower;
      snap_nonbasic(k);
    }
    factor_valid = false;
    values_valid = false;
  }

  void snap_nonbasic(int k) {
    const auto u = static_cast<std::size_t>(k);
    if (status[u] == BasisStatus::kAtUpper && std::isinf(upper[u])) status[u] = BasisStatus::kAtLower;
    if (status[u] == BasisStatus::kAtLower && std::isinf(lower[u])) status[u] = BasisStatus::kAtUpper;
    x[u] = status[u] == BasisStatus::kAtLower ? lower[u] : upper[u];
  }

  // a_k as (row, value) pairs
  template <typename F>
  void for_column(int k, F&& f) const {
    if (k < m) {
      f(k, 1.0);
      return;
    }
    for (const auto& [r, v] : cols[static_cast<std::size_t>(k - m)]) f(r, v);
  }

  double dot_column(int k, const Vec& y) const {
    if (k < m) return y[k];
    double s = 0.0;
    for (const auto& [r, v] : cols[static_cast<std::size_t>(k - m)]) s += v * y[r];
    return s;
  }

  bool factor() {
    etas.clear();
    SpMat B(m, m);
    std::vector<Eigen::Triplet<double>> trips;
    for (int p = 0; p < m; ++p) {
      for_column(head[static_cast<std::size_t>(p)], [&](int r, double v) { trips.emplace_back(r, p, v); });
    }
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    lu = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    lu->analyzePattern(B);
    lu->factorize(B);
    factor_valid = lu->info() == Eigen::Success;
    return factor_valid;
  }

  Vec ftran(Vec a) const {
    Vec out = m > 0 ? Vec(lu->solve(a)) : a;
    for (const auto& eta : etas) {
      const double xp = out[eta.pivot] / eta.pivot_value;
      if (xp != 0.0) {
        for (const auto& [i, v] : eta.column) {
          if (i != eta.pivot) out[i] -= v * xp;
        }
      }
      out[eta.pivot] = xp;
    }
    return out;
  }

  Vec btran(Vec c) const {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = c[it->pivot];
      for (const auto& [i, v] : it->column) {
        if (i != it->pivot) s -= v * c[i];
      }
      c[it->pivot] = s / it->pivot_value;
    }
    if (m == 0) return c;
    return lu->transpose().solve(c);
  }

  void compute_basic_values() {
    Vec r(m);
    for (int i = 0; i < m; ++i) r[i] = rhs[static_cast<std::size_t>(i)];
    for (int k = 0; k < num_vars(); ++k) {
      if (status[static_cast<std::size_t>(k)] == BasisStatus::kBasic) continue;
      const double xk = x[static_cast<std::size_t>(k)];
      if (xk == 0.0) continue;
      for_column(k, [&](int row, double v) { r[row] -= v * xk; });
    }
    const Vec xb = ftran(r);
    for (int p = 0; p < m; ++p) x[static_cast<std::size_t>(head[static_cast<std::size_t>(p)])] = xb[p];
    values_valid = true;
  }

  // Refactor; a singular basis falls back to the slack basis.
  void refresh() {
    if (!factor()) {
      slack_basis();
      factor();
    }
    compute_basic_values();
  }

  double infeasibility(int k, double tol) const {
    const auto u = static_cast<std::size_t>(k);
    if (x[u] < lower[u] - tol) return lower[u] - x[u];
    if (x[u] > upper[u] + tol) return x[u] - upper[u];
    return 0.0;
  }
};

SimplexSolver::SimplexSolver(LinearProgram lp, SimplexOptions options)
    : lp_(std::move(lp)), options_(options), impl_(std::make_unique<Impl>()) {
  lp_.validate();
  impl_->load(lp_);
}

SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

SimplexSolver::SimplexSolver(const SimplexSolver& other)
    : lp_(other.lp_), options_(other.options_), impl_(std::make_unique<Impl>()) {
  Impl& a = *impl_;
  const Impl& b = *other.impl_;
  a.m = b.m;
  a.lower = b.lower;
  a.upper = b.upper;
  a.cost = b.cost;
  a.x = b.x;
  a.status = b.status;
  a.cols = b.cols;
  a.rhs = b.rhs;
  a.head = b.head;
  a.pos = b.pos;
  a.factor_valid = false;
  a.values_valid = false;
}

int SimplexSolver::add_column(double lower, double upper, double cost,
                              const std::vector<LinearProgram::Entry>& row_entries, std::string name) {
  if (!std::isfinite(lower) || std::isnan(upper) || lower > upper) {
    throw std::invalid_argument("add_column: invalid bounds");
  }
  const int var = lp_.add_column(lower, upper, cost, row_entries, std::move(name));
  Impl& s = *impl_;
  std::vector<std::pair<int, double>> col;
  col.reserve(row_entries.size());
  for (const auto& e : row_entries) col.emplace_back(e.index, e.value);
  s.cols.push_back(std::move(col));
  s.lower.push_back(lower);
  s.upper.push_back(upper);
  s.cost.push_back(cost);
  s.status.push_back(BasisStatus::kAtLower);
  s.x.push_back(lower);
  s.pos.push_back(-1);
  if (lower != 0.0) s.values_valid = false;
  return var;
}

void SimplexSolver::set_bounds(int variable, double lower, double upper) {
  if (!std::isfinite(lower) || std::isnan(upper) || lower > upper) {
    throw std::invalid_argument("set_bounds: invalid bounds");
  }
  auto& v = lp_.variables.at(static_cast<std::size_t>(variable));
  v.lower = lower;
  v.upper = upper;
  Impl& s = *impl_;
  const int k = s.m + variable;
  const auto u = static_cast<std::size_t>(k);
  s.lower[u] = lower;
  s.upper[u] = upper;
  if (s.status[u] != BasisStatus::kBasic) {
    // Stay on the same side when possible.
    s.snap_nonbasic(k);
  }
  s.values_valid = false;
}

SimplexSolver::Basis SimplexSolver::basis() const {
  return {impl_->head, impl_->status};
}

void SimplexSolver::set_basis(const Basis& basis) {
  Impl& s = *impl_;
  if (basis.head.size() != static_cast<std::size_t>(s.m)) throw std::invalid_argument("basis size");
  // Columns added after the snapshot stay nonbasic at their lower bound.
  std::vector<BasisStatus> st = basis.status;
  st.resize(static_cast<std::size_t>(s.num_vars()), BasisStatus::kAtLower);
  s.status = st;
  s.head = basis.head;
  s.pos.assign(static_cast<std::size_t>(s.num_vars()), -1);
  for (int p = 0; p < s.m; ++p) s.pos[static_cast<std::size_t>(s.head[static_cast<std::size_t>(p)])] = p;
  for (int k = 0; k < s.num_vars(); ++k) {
    if (s.status[static_cast<std::size_t>(k)] != BasisStatus::kBasic) s.snap_nonbasic(k);
  }
  s.factor_valid = false;
  s.values_valid = false;
}

LpSolution SimplexSolver::solve() {
  Impl& s = *impl_;
  const int m = s.m;
  const int nv = s.num_vars();
  const double ptol = options_.pivot_tolerance;
  const double ftol = options_.feasibility_tolerance;
  const double dtol = options_.optimality_tolerance;
  const std::int64_t iter_limit = options_.iteration_limit > 0
                                      ? options_.iteration_limit
                                      : std::max<std::int64_t>(20000, 200LL * (m + nv));

  LpSolution sol;
  s.refresh();

  std::int64_t iter = 0;
  int degenerate_streak = 0;
  bool bland = false;
  bool verified = false;  // last "optimal/infeasible" verdict survived a fresh refactor
  Impl::Vec cb(m);

  while (true) {
    if (iter >= iter_limit) {
      sol.status = LpStatus::kIterationLimit;
      break;
    }
    if (static_cast<int>(s.etas.size()) >= options_.refactor_interval) s.refresh();

    // Phase selection from current primal infeasibility.
    bool phase1 = false;
    for (int p = 0; p < m; ++p) {
      const int k = s.head[static_cast<std::size_t>(p)];
      const auto u = static_cast<std::size_t>(k);
      double c = 0.0;
      if (s.x[u] < s.lower[u] - ftol) {
        c = -1.0;
      } else if (s.x[u] > s.upper[u] + ftol) {
        c = 1.0;
      }
      if (c != 0.0) phase1 = true;
      cb[p] = c;
    }
    if (!phase1) {
      for (int p = 0; p < m; ++p) cb[p] = s.cost[static_cast<std::size_t>(s.head[static_cast<std::size_t>(p)])];
    }
    const Impl::Vec y = s.btran(cb);

    // Pricing.
    int entering = -1;
    double best_score = 0.0;
    double entering_d = 0.0;
    for (int k = 0; k < nv; ++k) {
      const auto u = static_cast<std::size_t>(k);
      const BasisStatus st = s.status[u];
      if (st == BasisStatus::kBasic || s.lower[u] == s.upper[u]) continue;
      const double ck = phase1 ? 0.0 : s.cost[u];
      const double d = ck - s.dot_column(k, y);
      const bool eligible = (st == BasisStatus::kAtLower && d < -dtol) || (st == BasisStatus::kAtUpper && d > dtol);
      if (!eligible) continue;
      if (bland) {
        entering = k;
        entering_d = d;
        break;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        entering = k;
        entering_d = d;
      }
    }

    if (entering < 0) {
      if (!verified && !s.etas.empty()) {
        s.refresh();
        verified = true;
        continue;
      }
      sol.status = phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;
      break;
    }
    verified = false;

    const int q = entering;
    const auto uq = static_cast<std::size_t>(q);
    const double dir = s.status[uq] == BasisStatus::kAtLower ? 1.0 : -1.0;
    (void)entering_d;

    Impl::Vec aq = Impl::Vec::Zero(m);
    s.for_column(q, [&](int r, double v) { aq[r] = v; });
    const Impl::Vec alpha = s.ftran(aq);

    // Ratio test. Each basic variable i moves at rate -dir * alpha_i.
    // Breakpoints: feasible variables hitting a bound, infeasible ones
    // reaching feasibility (phase 1 only).
    auto limit_of = [&](int p, double rate, double slack_tol, bool& to_upper) -> double {
      const auto u = static_cast<std::size_t>(s.head[static_cast<std::size_t>(p)]);
      const double xv = s.x[u];
      if (rate < 0.0) {
        if (xv > s.upper[u] + ftol) {
          to_upper = true;
          return (xv - s.upper[u] + slack_tol) / -rate;
        }
        if (xv < s.lower[u] - ftol || std::isinf(s.lower[u])) return kInfinity;
        to_upper = false;
        return (xv - s.lower[u] + slack_tol) / -rate;
      }
      if (xv < s.lower[u] - ftol) {
        to_upper = false;
        return (s.lower[u] - xv + slack_tol) / rate;
      }
      if (xv > s.upper[u] + ftol || std::isinf(s.upper[u])) return kInfinity;
      to_upper = true;
      return (s.upper[u] - xv + slack_tol) / rate;
    };

    int leave_pos = -1;
    bool leave_to_upper = false;
    double step = kInfinity;
    if (bland) {
      int best_var = nv;
      for (int p = 0; p < m; ++p) {
        if (std::abs(alpha[p]) <= ptol) continue;
        bool up = false;
        const double t = std::max(0.0, limit_of(p, -dir * alpha[p], 0.0, up));
        if (std::isinf(t)) continue;
        const int var = s.head[static_cast<std::size_t>(p)];
        if (t < step - 1e-12 || (t <= step + 1e-12 && var < best_var)) {
          step = t;
          leave_pos = p;
          leave_to_upper = up;
          best_var = var;
        }
      }
    } else {
      // Harris two-pass: relaxed minimum, then the largest pivot within it.
      double relaxed = kInfinity;
      for (int p = 0; p < m; ++p) {
        if (std::abs(alpha[p]) <= ptol) continue;
        bool up = false;
        relaxed = std::min(relaxed, limit_of(p, -dir * alpha[p], ftol, up));
      }
      if (!std::isinf(relaxed)) {
        double best_alpha = 0.0;
        for (int p = 0; p < m; ++p) {
          if (std::abs(alpha[p]) <= ptol) continue;
          bool up = false;
          const double t = limit_of(p, -dir * alpha[p], 0.0, up);
          if (t <= relaxed && std::abs(alpha[p]) > best_alpha) {
            best_alpha = std::abs(alpha[p]);
            leave_pos = p;
            leave_to_upper = up;
            step = std::max(0.0, t);
          }
        }
      }
    }

    const double range = s.upper[uq] - s.lower[uq];
    const bool flip = range <= step;
    if (flip) step = range;

    if (std::isinf(step)) {
      if (phase1) {
        // Numerical trouble: a phase 1 ray cannot exist.
        s.refresh();
        ++iter;
        continue;
      }
      sol.status = LpStatus::kUnbounded;
      break;
    }

    // Update values.
    s.x[uq] += dir * step;
    for (int p = 0; p < m; ++p) {
      if (alpha[p] != 0.0) s.x[static_cast<std::size_t>(s.head[static_cast<std::size_t>(p)])] -= dir * step * alpha[p];
    }

    if (step <= 1e-11) {
      if (++degenerate_streak >= options_.degenerate_streak_for_bland) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }

    if (flip) {
      s.status[uq] = dir > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      s.x[uq] = dir > 0 ? s.upper[uq] : s.lower[uq];
    } else {
      const int leaving = s.head[static_cast<std::size_t>(leave_pos)];
      const auto ul = static_cast<std::size_t>(leaving);
      s.status[ul] = leave_to_upper ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      s.x[ul] = leave_to_upper ? s.upper[ul] : s.lower[ul];
      s.pos[ul] = -1;
      s.head[static_cast<std::size_t>(leave_pos)] = q;
      s.pos[uq] = leave_pos;
      s.status[uq] = BasisStatus::kBasic;
      Impl::Eta eta;
      eta.pivot = leave_pos;
      eta.pivot_value = alpha[leave_pos];
      for (int p = 0; p < m; ++p) {
        if (alpha[p] != 0.0) eta.column.emplace_back(p, alpha[p]);
      }
      s.etas.push_back(std::move(eta));
    }
    ++iter;
  }

  sol.iterations = iter;
  const int n = static_cast<int>(lp_.variables.size());
  sol.x.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) sol.x[static_cast<std::size_t>(j)] = s.x[static_cast<std::size_t>(m + j)];
  sol.objective = lp_.objective(sol.x);
  sol.variable_status.assign(s.status.begin() + m, s.status.end());

  // Duals and reduced costs from the phase 2 costs of the final basis.
  for (int p = 0; p < m; ++p) cb[p] = s.cost[static_cast<std::size_t>(s.head[static_cast<std::size_t>(p)])];
  const Impl::Vec y = m > 0 ? s.btran(cb) : Impl::Vec();
  sol.duals.resize(static_cast<std::size_t>(m));
  for (int r = 0; r < m; ++r) sol.duals[static_cast<std::size_t>(r)] = y[r];
  sol.reduced_costs.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int k = m + j;
    sol.reduced_costs[static_cast<std::size_t>(j)] =
        s.status[static_cast<std::size_t>(k)] == BasisStatus::kBasic ? 0.0 : s.cost[static_cast<std::size_t>(k)] - s.dot_column(k, y);
  }
  return sol;
}

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options) {
  SimplexSolver solver(lp, options);
  return solver.solve();
}

}  // namespace rulecg
