#pragma once

#include <string>
#include <vector>

namespace billiard::symbolic {

/// A word over the alphabet {0, ..., k0-1} with no two equal neighbours
/// (cyclically, if `cyclic`). Symbols are 0-based; text form is 1-based.
struct Word {
  std::vector<int> symbols;
  bool cyclic = false;

  int size() const { return static_cast<int>(symbols.size()); }
  int operator[](int i) const { return symbols[static_cast<std::size_t>(i)]; }
  bool operator==(const Word&) const = default;
  auto operator<=>(const Word& o) const { return symbols <=> o.symbols; }

  /// Parses "1213" or "1,2,1,3" (1-based) into 0-based symbols.
  static Word parse(const std::string& text, bool cyclic = false);
  std::string str() const;  // 1-based, digits concatenated (comma-separated if k0 > 9)
};

bool is_admissible(const Word& w);

/// All admissible words of the given length over k0 symbols, lexicographic.
std::vector<Word> enumerate_words(int k0, int length, bool cyclic);

/// Closed-form count of admissible words: k0 (k0-1)^{N-1} linear, and
/// (k0-1)^N + (-1)^N (k0-1) cyclic (N >= 2).
long long admissible_count(int k0, int length, bool cyclic);

Word rotate(const Word& w, int by);
Word reversed(const Word& w);
Word minimal_rotation(const Word& w);
/// Smallest p dividing N with w invariant under rotation by p.
int least_period(const Word& w);
bool is_primitive(const Word& w);

struct Necklace {
  Word representative;  // lexicographically minimal rotation
  int period = 0;
  bool primitive = false;
};

/// One representative per rotation class of primitive admissible cyclic
/// words of the given period, lexicographic. Period 1 yields nothing.
std::vector<Necklace> primitive_necklaces(int k0, int period);

/// Left shift (drop the first symbol) of a linear word.
Word shift(const Word& w);

/// One-symbol extensions j.w (j != w0) truncated to the original length,
/// sorted. Always k0 - 1 words.
std::vector<Word> preimage_words(const Word& w, int k0);

}  // namespace billiard::symbolic
