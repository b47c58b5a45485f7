#include "dwmap/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dwmap {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class NativeTokens {
 public:
  explicit NativeTokens(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) toks_.push_back(std::move(tok));
  }

  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    static const std::string kEmpty;
    return done() ? kEmpty : toks_[pos_];
  }
  std::string next(const std::string& what) {
    if (done()) throw std::runtime_error("model file ends early, expected " + what);
    return toks_[pos_++];
  }
  long integer(const std::string& what) {
    const std::string t = next(what);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw std::runtime_error("expected integer for " + what + ", got '" + t + "'");
    return v;
  }
  double number(const std::string& what) {
    const std::string t = next(what);
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw std::runtime_error("expected number for " + what + ", got '" + t + "'");
    return v;
  }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

Sense sense_from(const std::string& s) {
  if (s == "le") return Sense::LE;
  if (s == "eq") return Sense::EQ;
  if (s == "ge") return Sense::GE;
  throw std::runtime_error("unknown constraint sense '" + s + "'");
}

std::string sense_to(Sense s) {
  switch (s) {
    case Sense::LE: return "le";
    case Sense::EQ: return "eq";
    case Sense::GE: return "ge";
  }
  return "le";
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  NativeTokens toks(text);
  if (toks.next("format signature") != "dwmap-model") {
    throw std::runtime_error("not a dwmap-model file");
  }
  const long version = toks.integer("format version");
  if (version != 1) throw std::runtime_error("unsupported model version " + std::to_string(version));

  if (toks.next("'nodes'") != "nodes") throw std::runtime_error("expected 'nodes'");
  const long n = toks.integer("node count");
  if (toks.next("'cards'") != "cards") throw std::runtime_error("expected 'cards'");
  std::vector<int> cards(static_cast<std::size_t>(n));
  for (long s = 0; s < n; ++s) cards[s] = static_cast<int>(toks.integer("cardinality"));

  if (toks.next("'edges'") != "edges") throw std::runtime_error("expected 'edges'");
  const long m = toks.integer("edge count");
  std::vector<Edge> edges(static_cast<std::size_t>(m));
  for (long e = 0; e < m; ++e) {
    if (toks.next("'e'") != "e") throw std::runtime_error("expected 'e'");
    edges[e].s = static_cast<int>(toks.integer("edge endpoint"));
    edges[e].t = static_cast<int>(toks.integer("edge endpoint"));
  }

  std::vector<std::vector<double>> local(static_cast<std::size_t>(n));
  for (long s = 0; s < n; ++s) local[s].assign(static_cast<std::size_t>(cards[s]), 0.0);
  std::vector<std::vector<double>> pairwise(static_cast<std::size_t>(m));
  for (long e = 0; e < m; ++e) {
    if (edges[e].s < 0 || edges[e].s >= n || edges[e].t < 0 || edges[e].t >= n) {
      throw std::runtime_error("edge endpoint out of range");
    }
    pairwise[e].assign(static_cast<std::size_t>(cards[edges[e].s]) * cards[edges[e].t], 0.0);
  }

  std::vector<SideConstraint> constraints;
  while (true) {
    const std::string key = toks.next("section keyword or 'end'");
    if (key == "end") break;
    if (key == "phi") {
      const long s = toks.integer("node id");
      if (s < 0 || s >= n) throw std::runtime_error("phi references unknown node");
      for (int i = 0; i < cards[s]; ++i) local[s][i] = toks.number("phi value");
    } else if (key == "psi") {
      const long a = toks.integer("edge endpoint");
      const long b = toks.integer("edge endpoint");
      long e = -1;
      for (long i = 0; i < m; ++i) {
        if (edges[i].s == a && edges[i].t == b) {
          e = i;
          break;
        }
      }
      if (e < 0) throw std::runtime_error("psi references unknown edge (" + std::to_string(a) +
                                          ", " + std::to_string(b) + ")");
      for (std::size_t k = 0; k < pairwise[e].size(); ++k) {
        pairwise[e][k] = toks.number("psi value");
      }
    } else if (key == "injective") {
      SideConstraint sc = SideConstraint::injective();
      if (toks.peek() == "outlier") {
        toks.next("'outlier'");
        sc.outlier_state = static_cast<int>(toks.integer("outlier state"));
      }
      constraints.push_back(std::move(sc));
    } else if (key == "linear") {
      const Sense sense = sense_from(toks.next("sense"));
      const double rhs = toks.number("rhs");
      const long nterms = toks.integer("term count");
      std::vector<LinearTerm> terms;
      terms.reserve(static_cast<std::size_t>(nterms));
      for (long t = 0; t < nterms; ++t) {
        LinearTerm term;
        term.node = static_cast<int>(toks.integer("term node"));
        term.state = static_cast<int>(toks.integer("term state"));
        term.coeff = toks.number("term coefficient");
        terms.push_back(term);
      }
      constraints.push_back(SideConstraint::linear(std::move(terms), sense, rhs));
    } else {
      throw std::runtime_error("unknown section '" + key + "'");
    }
  }

  ModelFile out;
  out.graph = Graph(std::move(cards), std::move(edges), std::move(local), std::move(pairwise));
  out.constraints = std::move(constraints);
  return out;
}

std::string write_model(const ModelFile& model) {
  const Graph& g = model.graph;
  std::ostringstream out;
  out << "dwmap-model 1\n";
  out << "nodes " << g.num_nodes() << "\n";
  out << "cards";
  for (NodeId s = 0; s < g.num_nodes(); ++s) out << ' ' << g.cardinality(s);
  out << "\n";
  out << "edges " << g.num_edges() << "\n";
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out << "e " << g.edge(e).s << ' ' << g.edge(e).t << "\n";
  }
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    out << "phi " << s;
    for (double v : g.local_potential(s)) out << ' ' << fmt_double(v);
    out << "\n";
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    out << "psi " << g.edge(e).s << ' ' << g.edge(e).t;
    for (double v : g.pairwise_potential(e)) out << ' ' << fmt_double(v);
    out << "\n";
  }
  for (const SideConstraint& sc : model.constraints) {
    if (sc.kind == SideConstraint::Kind::AtMostOnePerState) {
      out << "injective";
      if (sc.outlier_state >= 0) out << " outlier " << sc.outlier_state;
      out << "\n";
    } else {
      out << "linear " << sense_to(sc.sense) << ' ' << fmt_double(sc.rhs) << ' '
          << sc.terms.size();
      for (const LinearTerm& t : sc.terms) {
        out << ' ' << t.node << ' ' << t.state << ' ' << fmt_double(t.coeff);
      }
      out << "\n";
    }
  }
  out << "end\n";
  return out.str();
}

ModelFile load_model(const std::string& path, const UaiOptions& uai_opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::istringstream sniff(text);
  std::string first;
  sniff >> first;
  if (first == "dwmap-model") return parse_model(text);
  if (first == "MARKOV") {
    ModelFile out;
    out.graph = parse_uai(text, uai_opts);
    return out;
  }
  throw std::runtime_error("unrecognized model format in " + path +
                           " (expected 'dwmap-model' or 'MARKOV')");
}

}  // namespace dwmap
