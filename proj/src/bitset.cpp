#include "rulecg/bitset.hpp"

#include <cassert>

namespace rulecg {

Bitset::Bitset(std::size_t size, bool value)
    : size_(size), words_((size + kWordBits - 1) / kWordBits, value ? ~Word{0} : Word{0}) {
  clear_tail();
}

void Bitset::clear_tail() {
  const std::size_t rem = size_ % kWordBits;
  if (rem != 0 && !words_.empty()) {
    words_.back() &= (Word{1} << rem) - 1;
  }
}

void Bitset::fill(bool value) {
  for (Word& w : words_) w = value ? ~Word{0} : Word{0};
  clear_tail();
}

std::size_t Bitset::count() const {
  std::size_t total = 0;
  for (Word w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

bool Bitset::any() const {
  for (Word w : words_) {
    if (w != 0) return true;
  }
  return false;
}

void Bitset::flip() {
  for (Word& w : words_) w = ~w;
  clear_tail();
}

Bitset& Bitset::operator&=(const Bitset& other) {
  assert(size_ == other.size_);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

Bitset& Bitset::operator|=(const Bitset& other) {
  assert(size_ == other.size_);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

void Bitset::assign_and(const Bitset& a, const Bitset& b) {
  assert(a.size_ == b.size_);
  if (size_ != a.size_) {
    size_ = a.size_;
    words_.resize(a.words_.size());
  }
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] = a.words_[i] & b.words_[i];
}

std::size_t Bitset::count_and(const Bitset& other) const {
  assert(size_ == other.size_);
  std::size_t total = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    total += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  }
  return total;
}

bool Bitset::is_subset_of(const Bitset& other) const {
  assert(size_ == other.size_);
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if ((words_[i] & ~other.words_[i]) != 0) return false;
  }
  return true;
}

double Bitset::weighted_sum(std::span<const double> weights) const {
  double total = 0.0;
  for_each([&](std::size_t i) { total += weights[i]; });
  return total;
}

std::vector<std::size_t> Bitset::indices() const {
  std::vector<std::size_t> out;
  out.reserve(count());
  for_each([&](std::size_t i) { out.push_back(i); });
  return out;
}

std::size_t Bitset::hash() const {
  // FNV-1a over words.
  std::size_t h = 1469598103934665603ull;
  for (Word w : words_) {
    h ^= static_cast<std::size_t>(w);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace rulecg
