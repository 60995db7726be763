#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rulecg {

// Fixed-length bitset over samples. Coverage of a clause is the AND of the
// bitsets of its features, so everything here is word-parallel.
class Bitset {
 public:
  using Word = std::uint64_t;
  static constexpr std::size_t kWordBits = 64;

  Bitset() = default;
  explicit Bitset(std::size_t size, bool value = false);

  std::size_t size() const { return size_; }
  std::span<const Word> words() const { return words_; }
  std::span<Word> words() { return words_; }

  bool test(std::size_t i) const {
    return (words_[i / kWordBits] >> (i % kWordBits)) & 1u;
  }
  void set(std::size_t i, bool value = true) {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  void fill(bool value);
  std::size_t count() const;
  bool any() const;
  bool none() const { return !any(); }
  void flip();

  Bitset& operator&=(const Bitset& other);
  Bitset& operator|=(const Bitset& other);
  friend Bitset operator&(Bitset a, const Bitset& b) { return a &= b; }
  friend Bitset operator|(Bitset a, const Bitset& b) { return a |= b; }
  friend Bitset operator~(Bitset a) {
    a.flip();
    return a;
  }
  friend bool operator==(const Bitset& a, const Bitset& b) = default;

  // this = a & b without allocating; all three must have equal size.
  void assign_and(const Bitset& a, const Bitset& b);
  // popcount(this & other)
  std::size_t count_and(const Bitset& other) const;
  bool is_subset_of(const Bitset& other) const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      Word bits = words_[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        f(w * kWordBits + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

  // Sum of weights[i] over set bits i.
  double weighted_sum(std::span<const double> weights) const;
  std::vector<std::size_t> indices() const;

  std::size_t hash() const;

 private:
  void clear_tail();

  std::size_t size_ = 0;
  std::vector<Word> words_;
};

}  // namespace rulecg
