#include "billiard/symbolic.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "billiard/types.hpp"

namespace billiard::symbolic {

Word Word::parse(const std::string& text, bool cyclic) {
  Word w;
  w.cyclic = cyclic;
  auto bad = [&] { return DomainError("word: cannot parse '" + text + "'"); };
  if (text.find_first_of(",- \t") != std::string::npos) {
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      if (!std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }) ||
          tok.size() > 6)
        throw bad();
      w.symbols.push_back(std::stoi(tok) - 1);
      tok.clear();
    };
    for (char c : text) {
      if (c == ',' || c == '-' || std::isspace(static_cast<unsigned char>(c)))
        flush();
      else
        tok += c;
    }
    flush();
  } else {
    for (char c : text) {
      if (!std::isdigit(static_cast<unsigned char>(c)) || c == '0') throw bad();
      w.symbols.push_back(c - '1');
    }
  }
  if (w.symbols.empty()) throw DomainError("word: empty");
  for (int s : w.symbols)
    if (s < 0) throw DomainError("word: symbols are 1-based");
  return w;
}

std::string Word::str() const {
  const bool wide = std::any_of(symbols.begin(), symbols.end(), [](int s) { return s >= 9; });
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (wide && i > 0) out += ',';
    out += std::to_string(symbols[i] + 1);
  }
  return out;
}

bool is_admissible(const Word& w) {
  for (int i = 0; i + 1 < w.size(); ++i)
    if (w[i] == w[i + 1]) return false;
  if (w.cyclic && w.size() >= 2 && w[0] == w[w.size() - 1]) return false;
  if (w.cyclic && w.size() == 1) return false;
  return true;
}

std::vector<Word> enumerate_words(int k0, int length, bool cyclic) {
  std::vector<Word> out;
  if (length < 1 || k0 < 1) return out;
  Word cur;
  cur.cyclic = cyclic;
  cur.symbols.reserve(static_cast<std::size_t>(length));
  // Depth-first in increasing symbol order gives lexicographic output.
  auto rec = [&](auto&& self) -> void {
    if (cur.size() == length) {
      if (is_admissible(cur)) out.push_back(cur);
      return;
    }
    for (int s = 0; s < k0; ++s) {
      if (!cur.symbols.empty() && cur.symbols.back() == s) continue;
      cur.symbols.push_back(s);
      self(self);
      cur.symbols.pop_back();
    }
  };
  rec(rec);
  return out;
}

long long admissible_count(int k0, int length, bool cyclic) {
  long long p = 1;
  for (int i = 0; i < length; ++i) p *= (k0 - 1);
  if (!cyclic) return length < 1 ? 0 : p / (k0 - 1) * k0;
  if (length == 1) return 0;
  return p + ((length % 2 == 0) ? 1 : -1) * (k0 - 1);
}

Word rotate(const Word& w, int by) {
  Word r = w;
  const int n = w.size();
  if (n == 0) return r;
  by = ((by % n) + n) % n;
  std::rotate(r.symbols.begin(), r.symbols.begin() + by, r.symbols.end());
  return r;
}

Word reversed(const Word& w) {
  Word r = w;
  std::reverse(r.symbols.begin(), r.symbols.end());
  return r;
}

Word minimal_rotation(const Word& w) {
  Word best = w;
  for (int k = 1; k < w.size(); ++k) best = std::min(best, rotate(w, k));
  return best;
}

int least_period(const Word& w) {
  const int n = w.size();
  for (int p = 1; p < n; ++p)
    if (n % p == 0 && rotate(w, p).symbols == w.symbols) return p;
  return n;
}

bool is_primitive(const Word& w) { return least_period(w) == w.size(); }

std::vector<Necklace> primitive_necklaces(int k0, int period) {
  std::vector<Necklace> out;
  if (period < 2) return out;
  for (const Word& w : enumerate_words(k0, period, true)) {
    if (!is_primitive(w)) continue;
    if (minimal_rotation(w).symbols != w.symbols) continue;
    out.push_back(Necklace{w, period, true});
  }
  return out;
}

Word shift(const Word& w) {
  Word r = w;
  if (!r.symbols.empty()) r.symbols.erase(r.symbols.begin());
  return r;
}

std::vector<Word> preimage_words(const Word& w, int k0) {
  std::vector<Word> out;
  for (int j = 0; j < k0; ++j) {
    if (w.size() > 0 && j == w[0]) continue;
    Word u;
    u.cyclic = false;
    u.symbols.push_back(j);
    u.symbols.insert(u.symbols.end(), w.symbols.begin(), w.symbols.end());
    u.symbols.pop_back();
    out.push_back(u);
  }
  return out;
}

}  // namespace billiard::symbolic
