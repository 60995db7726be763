#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace rulecg {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { kGreaterEqual, kLessEqual, kEqual };

// min c'x  s.t.  rows (sense, rhs),  lower <= x <= upper.
// Lower bounds must be finite; upper bounds may be +inf.
struct LinearProgram {
  struct Entry {
    int index = 0;
    double value = 0.0;
  };
  struct Variable {
    double lower = 0.0;
    double upper = kInfinity;
    double cost = 0.0;
    std::string name;
  };
  struct Row {
    std::vector<Entry> entries;  // over variables
    RowSense sense = RowSense::kGreaterEqual;
    double rhs = 0.0;
    std::string name;
  };

  std::vector<Variable> variables;
  std::vector<Row> rows;

  int add_variable(double lower, double upper, double cost, std::string name = {});
  int add_row(RowSense sense, double rhs, std::vector<Entry> entries, std::string name = {});
  // Appends a variable and its coefficients in existing rows (entries index rows).
  int add_column(double lower, double upper, double cost, const std::vector<Entry>& row_entries,
                 std::string name = {});

  // Throws std::invalid_argument on bad bounds, duplicate or out-of-range entries.
  void validate() const;
  double objective(const std::vector<double>& x) const;
  double row_activity(std::size_t r, const std::vector<double>& x) const;
};

// Line-oriented debug dump: objective, rows, bounds.
void write_lp(const LinearProgram& lp, std::ostream& out);

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };
const char* to_string(LpStatus status);

enum class BasisStatus : std::uint8_t { kBasic, kAtLower, kAtUpper };

struct SimplexOptions {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
  double optimality_tolerance = 1e-7;
  int degenerate_streak_for_bland = 50;
  int refactor_interval = 64;
  std::int64_t iteration_limit = 0;  // 0: derived from problem size
};

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;              // per variable
  std::vector<double> duals;          // per row, d_j = c_j - sum_r duals_r a_rj
  std::vector<double> reduced_costs;  // per variable
  std::vector<BasisStatus> variable_status;
  std::int64_t iterations = 0;
};

// Bounded-variable revised simplex. Phase 1 minimizes the sum of bound
// infeasibilities of basic variables, so any starting basis works; this is
// what makes warm starts after column additions or bound changes cheap.
// Dantzig pricing switches to Bland's rule after a streak of degenerate
// pivots and back after the first nondegenerate one.
class SimplexSolver {
 public:
  explicit SimplexSolver(LinearProgram lp, SimplexOptions options = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;
  SimplexSolver(const SimplexSolver&);
  SimplexSolver& operator=(const SimplexSolver&) = delete;

  const LinearProgram& program() const { return lp_; }
  std::size_t num_rows() const { return lp_.rows.size(); }
  std::size_t num_variables() const { return lp_.variables.size(); }

  // New column enters nonbasic at its lower bound; the basis is kept.
  int add_column(double lower, double upper, double cost,
                 const std::vector<LinearProgram::Entry>& row_entries, std::string name = {});
  void set_bounds(int variable, double lower, double upper);

  LpSolution solve();

  // Basis snapshot for restoring a warm start (e.g. in a search tree).
  struct Basis {
    std::vector<int> head;
    std::vector<BasisStatus> status;
  };
  Basis basis() const;
  void set_basis(const Basis& basis);

 private:
  struct Impl;
  LinearProgram lp_;
  SimplexOptions options_;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace rulecg
