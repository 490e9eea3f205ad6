// Shared test utilities: file loading, path navigation into feature
// structures, an independent satisfaction checker, and the closed-world
// expansion used to compare the two program encodings.
#ifndef TFS_TESTS_HELPERS_HPP
#define TFS_TESTS_HELPERS_HPP

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tfs/classifier.hpp"
#include "tfs/compiler.hpp"
#include "tfs/description.hpp"
#include "tfs/fstruct.hpp"
#include "tfs/grammar.hpp"
#include "tfs/interpreter.hpp"

namespace tfs::test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string grammar_path(const std::string& name) {
  return std::string(TFS_GRAMMAR_DIR) + "/" + name;
}

inline std::string grammar_text(const std::string& name) {
  return read_file(grammar_path(name));
}

/// Follow a dotted feature path ("goals.hd.arg1") from root; throws when a
/// feature is absent.
inline Node* at(const Signature& sig, Node* root, const std::string& path) {
  Node* n = deref(root);
  std::istringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    Node* next = n->arc(sig.feat_id(part));
    if (!next) throw std::runtime_error("no feature '" + part + "' at path");
    n = deref(next);
  }
  return n;
}

inline const Node* at(const Signature& sig, const Node* root, const std::string& path) {
  return at(sig, const_cast<Node*>(root), path);
}

// ---------------------------------------------------------------------------
// Independent satisfaction checker.
//
// Decides whether a (fully built) feature structure satisfies a desugared
// description, by trying each DNF disjunct with a fresh variable
// environment. Conjunctive checking is deterministic: a variable binds to
// the node at its first occurrence and later occurrences must be the very
// same node.
// ---------------------------------------------------------------------------

namespace detail_sat {

inline bool sat_conj(const Signature& sig, const Node* n, const DescPtr& d,
                     std::unordered_map<std::string, const Node*>& env) {
  n = deref(n);
  switch (d->kind) {
    case Desc::Type:
      return sig.subsumes(d->type, n->type);
    case Desc::Var: {
      auto [it, fresh] = env.emplace(d->var, n);
      return fresh || it->second == n;
    }
    case Desc::Conj:
      return sat_conj(sig, n, d->a, env) && sat_conj(sig, n, d->b, env);
    case Desc::Feat: {
      const Node* v = n->arc(d->feat);
      return v && sat_conj(sig, v, d->a, env);
    }
    case Desc::Disj:
    case Desc::List:
      throw std::runtime_error("sat_conj needs a desugared conjunctive description");
  }
  return false;
}

}  // namespace detail_sat

/// True iff the structure rooted at n satisfies the (desugared) description.
inline bool satisfies(const Signature& sig, const Node* n, const DescPtr& d) {
  for (const auto& disj : to_dnf(d)) {
    std::unordered_map<std::string, const Node*> env;
    if (detail_sat::sat_conj(sig, n, disj, env)) return true;
  }
  return false;
}

/// Soundness of one solution: it satisfies the query, and every node whose
/// type falls under a constraint antecedent satisfies that constraint's
/// consequent. Each node is checked once, so cyclic structures terminate.
inline bool solution_sound(const Grammar& g, const Node* root, const DescPtr& query,
                           std::string* why = nullptr) {
  if (!satisfies(g.sig, root, query)) {
    if (why) *why = "solution does not satisfy the query";
    return false;
  }
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{deref(root)};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const Constraint& c : g.constraints) {
      if (!g.sig.subsumes(c.antecedent, n->type)) continue;
      if (!satisfies(g.sig, n, c.consequent)) {
        if (why)
          *why = "node of type '" + g.sig.type_name(n->type) +
                 "' violates the constraint on '" + g.sig.type_name(c.antecedent) + "'";
        return false;
      }
    }
    for (const auto& [f, v] : n->arcs) {
      (void)f;
      stack.push_back(deref(v));
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Closed-world expansion.
//
// The run-time inheritance encoding only accepts structures whose nodes all
// have minimal types and every appropriate feature present. The optimized
// program leaves unconstrained substructure general. To compare solution
// sets, expand an optimized solution into the set of canonical forms of its
// minimal completions. Only applicable when every general node expands to
// feature-free simple minimal types; anything else throws, flagging the
// query as unsuitable for the comparison.
// ---------------------------------------------------------------------------

inline std::set<std::string> expand_solution(const Grammar& g,
                                             const TypeClassification& cls,
                                             const Node* root) {
  const Signature& sig = g.sig;
  Heap heap;
  Node* r = copy_fs(heap, const_cast<Node*>(root));

  // Collect nodes and fill missing appropriate features. Filled values must
  // themselves be feature-free, otherwise filling could go on forever.
  std::vector<Node*> nodes;
  {
    std::unordered_set<const Node*> seen;
    std::vector<Node*> stack{r};
    while (!stack.empty()) {
      Node* n = deref(stack.back());
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      nodes.push_back(n);
      std::vector<FeatId> missing;
      for (const auto& [f, v] : sig.approp_row(n->type)) {
        (void)v;
        if (!n->arc(f)) missing.push_back(f);
      }
      for (FeatId f : missing) {
        TypeId v = *sig.approp(n->type, f);
        if (!sig.approp_row(v).empty())
          throw std::runtime_error("expansion would introduce structured node '" +
                                   sig.type_name(v) + "'");
        heap.add_arc(n, f, heap.make(v));
      }
      for (const auto& [f, v] : n->arcs) {
        (void)f;
        stack.push_back(v);
      }
    }
  }

  // Enumerate minimal retypings of the non-minimal nodes.
  std::vector<Node*> open;
  std::vector<std::vector<TypeId>> choices;
  for (Node* n : nodes) {
    if (sig.is_minimal(n->type)) continue;
    auto mins = sig.minimal_subtypes(n->type);
    for (TypeId m : mins) {
      if (!sig.approp_row(m).empty())
        throw std::runtime_error("expansion of '" + sig.type_name(n->type) +
                                 "' would introduce features via '" + sig.type_name(m) + "'");
      if (!cls.is_simple(m))
        throw std::runtime_error("expansion of '" + sig.type_name(n->type) +
                                 "' hits non-simple type '" + sig.type_name(m) + "'");
    }
    open.push_back(n);
    choices.push_back(std::move(mins));
  }

  std::set<std::string> out;
  std::size_t combos = 1;
  for (const auto& c : choices) {
    combos *= c.size();
    if (combos > 4096) throw std::runtime_error("expansion too large");
  }
  std::vector<std::size_t> pick(open.size(), 0);
  for (;;) {
    std::vector<TypeId> saved;
    for (std::size_t i = 0; i < open.size(); ++i) {
      saved.push_back(open[i]->type);
      open[i]->type = choices[i][pick[i]];
    }
    out.insert(canonical_form(sig, r));
    for (std::size_t i = 0; i < open.size(); ++i) open[i]->type = saved[i];
    std::size_t i = 0;
    for (; i < pick.size(); ++i) {
      if (++pick[i] < choices[i].size()) break;
      pick[i] = 0;
    }
    if (i == pick.size()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Query running helpers.
// ---------------------------------------------------------------------------

struct QueryRun {
  std::vector<Solution> solutions;
  Stats stats;
  bool depth_limit_hit = false;
};

inline QueryRun run_query(const Program& prog, const std::string& query, int depth,
                          int max_solutions = 256) {
  QueryRun out;
  SolveOptions opts;
  opts.depth_bound = depth;
  QuerySession session(prog, query, opts);
  while (static_cast<int>(out.solutions.size()) < max_solutions) {
    auto s = session.next();
    if (!s) break;
    out.solutions.push_back(*s);
  }
  out.stats = session.stats();
  out.depth_limit_hit = session.depth_limit_hit();
  return out;
}

inline std::set<std::string> canonical_set(const Signature& sig, const QueryRun& run) {
  std::set<std::string> out;
  for (const auto& s : run.solutions) out.insert(canonical_form(sig, s.root));
  return out;
}

}  // namespace tfs::test

#endif  // TFS_TESTS_HELPERS_HPP
