#include "dwmap/uai.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <utility>
#include <vector>

namespace dwmap {

namespace {

struct Token {
  std::string text;
  int line = 0;
  int column = 0;
};

class Tokens {
 public:
  explicit Tokens(const std::string& text) {
    int line = 1, col = 1;
    std::string cur;
    int tok_line = 0, tok_col = 0;
    auto flush = [&] {
      if (!cur.empty()) {
        toks_.push_back({cur, tok_line, tok_col});
        cur.clear();
      }
    };
    for (char c : text) {
      if (c == '\n') {
        flush();
        ++line;
        col = 1;
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        flush();
        ++col;
        continue;
      }
      if (cur.empty()) {
        tok_line = line;
        tok_col = col;
      }
      cur.push_back(c);
      ++col;
    }
    flush();
    end_line_ = line;
  }

  bool done() const { return pos_ >= toks_.size(); }

  const Token& next(const std::string& what) {
    if (done()) throw ParseError("unexpected end of input, expected " + what, end_line_, 1);
    return toks_[pos_++];
  }

  long integer(const std::string& what) {
    const Token& t = next(what);
    char* end = nullptr;
    const long v = std::strtol(t.text.c_str(), &end, 10);
    if (end == t.text.c_str() || *end != '\0') {
      throw ParseError("expected integer for " + what + ", got '" + t.text + "'", t.line,
                       t.column);
    }
    return v;
  }

  double number(const std::string& what) {
    const Token& t = next(what);
    char* end = nullptr;
    const double v = std::strtod(t.text.c_str(), &end);
    if (end == t.text.c_str() || *end != '\0') {
      throw ParseError("expected number for " + what + ", got '" + t.text + "'", t.line,
                       t.column);
    }
    return v;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int end_line_ = 1;
};

}  // namespace

Graph parse_uai(const std::string& text, const UaiOptions& opts) {
  Tokens toks(text);

  const Token& header = toks.next("network type");
  if (header.text != "MARKOV") {
    throw ParseError("expected MARKOV header, got '" + header.text + "'", header.line,
                     header.column);
  }
  const long n = toks.integer("variable count");
  if (n < 0) throw ParseError("negative variable count", header.line, header.column);
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (long s = 0; s < n; ++s) {
    const long c = toks.integer("cardinality of variable " + std::to_string(s));
    if (c < 1) throw ParseError("variable " + std::to_string(s) + " has cardinality " +
                                    std::to_string(c),
                                header.line, header.column);
    cards[s] = static_cast<int>(c);
  }

  const long nclq = toks.integer("clique count");
  struct Scope {
    std::vector<int> vars;
  };
  std::vector<Scope> scopes(static_cast<std::size_t>(nclq));
  for (long c = 0; c < nclq; ++c) {
    const Token& at = toks.next("clique arity");
    char* end = nullptr;
    const long arity = std::strtol(at.text.c_str(), &end, 10);
    if (end == at.text.c_str() || *end != '\0') {
      throw ParseError("expected clique arity, got '" + at.text + "'", at.line, at.column);
    }
    if (arity < 1 || arity > 2) {
      throw ParseError("clique " + std::to_string(c) + " has arity " + std::to_string(arity) +
                           "; only unary and pairwise cliques are supported",
                       at.line, at.column);
    }
    for (long k = 0; k < arity; ++k) {
      const Token& vt = toks.next("clique variable");
      char* vend = nullptr;
      const long v = std::strtol(vt.text.c_str(), &vend, 10);
      if (vend == vt.text.c_str() || *vend != '\0' || v < 0 || v >= n) {
        throw ParseError("invalid variable '" + vt.text + "' in clique " + std::to_string(c),
                         vt.line, vt.column);
      }
      scopes[c].vars.push_back(static_cast<int>(v));
    }
    if (scopes[c].vars.size() == 2 && scopes[c].vars[0] == scopes[c].vars[1]) {
      throw ParseError("clique " + std::to_string(c) + " repeats a variable", at.line,
                       at.column);
    }
  }

  auto to_log = [&](double v, const Token& at) {
    if (opts.log_domain) {
      if (!std::isfinite(v)) throw ParseError("non-finite log potential", at.line, at.column);
      return v;
    }
    if (v < 0.0) throw ParseError("negative value in linear-domain table", at.line, at.column);
    return std::log(std::max(v, opts.zero_floor));
  };

  std::vector<std::vector<double>> local(static_cast<std::size_t>(n));
  for (long s = 0; s < n; ++s) local[s].assign(static_cast<std::size_t>(cards[s]), 0.0);

  // Pairwise tables keyed by unordered pair; first occurrence fixes the
  // stored orientation, repeats accumulate (transposed when needed).
  std::map<std::pair<int, int>, std::size_t> edge_of;
  std::vector<Edge> edges;
  std::vector<std::vector<double>> pairwise;

  for (long c = 0; c < nclq; ++c) {
    const Token& sz = toks.next("table size of clique " + std::to_string(c));
    char* end = nullptr;
    const long entries = std::strtol(sz.text.c_str(), &end, 10);
    if (end == sz.text.c_str() || *end != '\0') {
      throw ParseError("expected table size, got '" + sz.text + "'", sz.line, sz.column);
    }
    long want = 1;
    for (int v : scopes[c].vars) want *= cards[v];
    if (entries != want) {
      throw ParseError("table of clique " + std::to_string(c) + " declares " +
                           std::to_string(entries) + " entries, scope needs " +
                           std::to_string(want),
                       sz.line, sz.column);
    }
    if (scopes[c].vars.size() == 1) {
      const int s = scopes[c].vars[0];
      for (long k = 0; k < entries; ++k) {
        local[s][k] += to_log(toks.number("table entry"), sz);
      }
      continue;
    }
    const int a = scopes[c].vars[0];
    const int b = scopes[c].vars[1];
    const auto key = std::minmax(a, b);
    auto it = edge_of.find(key);
    if (it == edge_of.end()) {
      it = edge_of.insert({key, edges.size()}).first;
      edges.push_back({a, b});
      pairwise.emplace_back(static_cast<std::size_t>(cards[a]) * cards[b], 0.0);
    }
    const std::size_t e = it->second;
    const bool transposed = edges[e].s != a;
    std::vector<double>& table = pairwise[e];
    const int ct_stored = cards[edges[e].t];
    for (int i = 0; i < cards[a]; ++i) {
      for (int j = 0; j < cards[b]; ++j) {
        const double v = to_log(toks.number("table entry"), sz);
        // (i, j) indexes the clique's own scope order.
        const int k = transposed ? flat_index(j, i, ct_stored) : flat_index(i, j, ct_stored);
        table[k] += v;
      }
    }
  }

  return Graph(std::move(cards), std::move(edges), std::move(local), std::move(pairwise));
}

}  // namespace dwmap
