#ifndef TFS_COMPILER_HPP
#define TFS_COMPILER_HPP

#include <map>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "tfs/classifier.hpp"
#include "tfs/description.hpp"
#include "tfs/grammar.hpp"

namespace tfs {

/// Relation namespace. The optimized program only uses Main (relations
/// named by types); the naive tripartite encoding adds per-type Cons,
/// Hier and TypeRel relations.
enum class RelKind : std::uint8_t { Main, Cons, Hier, TypeRel };

struct Rel {
  RelKind kind;
  TypeId type;

  bool operator==(const Rel&) const = default;
  bool operator<(const Rel& o) const {
    return kind != o.kind ? kind < o.kind : type < o.type;
  }
};

inline std::string rel_name(const Signature& sig, Rel r) {
  switch (r.kind) {
    case RelKind::Main: return sig.type_name(r.type);
    case RelKind::Cons: return sig.type_name(r.type) + "_cons";
    case RelKind::Hier: return sig.type_name(r.type) + "_hier";
    case RelKind::TypeRel: return sig.type_name(r.type) + "_type";
  }
  return "?";
}

struct Goal {
  Rel rel;
  Node* node;  // within the owning clause's head graph (or query graph)
};

struct Clause {
  Rel rel;
  Node* head;  // argument structure; fully filled at compile time
  std::vector<Goal> body;
};

struct Program {
  std::shared_ptr<Heap> heap;  // owns all clause graphs; frozen after compile
  std::shared_ptr<const Grammar> grammar;
  TypeClassification classification;
  std::map<Rel, std::vector<Clause>> clauses;
  std::map<TypeId, std::vector<TypeId>> dispatch;  // non-minimal type -> minimal subtypes
  bool naive = false;
  std::vector<std::string> warnings;

  const Signature& sig() const { return grammar->sig; }

  const std::vector<Clause>& clauses_for(Rel r) const {
    static const std::vector<Clause> none;
    auto it = clauses.find(r);
    return it == clauses.end() ? none : it->second;
  }
};

/// Constraint inheritance: the conjunction of TypeLit(t) with the
/// consequents of every constraint whose antecedent subsumes t, supertypes
/// first, each consequent in its own variable scope.
inline DescPtr inherit(const Grammar& g, TypeId t) {
  struct Item { int topo; std::size_t index; const Constraint* c; };
  std::vector<Item> items;
  for (std::size_t i = 0; i < g.constraints.size(); ++i) {
    const Constraint& c = g.constraints[i];
    if (g.sig.subsumes(c.antecedent, t))
      items.push_back({g.sig.topo_index(c.antecedent), i, &c});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.topo != b.topo ? a.topo < b.topo : a.index < b.index;
  });
  DescPtr d = Desc::type_lit(t);
  for (const Item& it : items)
    d = Desc::conj(d, rename_vars(it.c->consequent,
                                  "c" + std::to_string(it.index) + "#"));
  return d;
}

namespace detail {

/// Steps 1-2 of the clause-body computation. Walks the (possibly cyclic)
/// structure once, filling hiding features as it goes and collecting the
/// goals the algorithm enters.
struct RhsWalker {
  const TypeClassification& cls;
  const Signature& sig;
  Heap& heap;
  std::vector<Goal> goals;
  std::unordered_set<const Node*> visited;

  bool has_goal(TypeId t, const Node* n) const {
    for (const Goal& g : goals)
      if (g.rel.type == t && deref(g.node) == n) return true;
    return false;
  }

  /// True iff every hiding subtype of t has exactly t's hiding features
  /// (step 2b's recursion condition).
  bool subtypes_hide_alike(TypeId t) const {
    const auto& own = cls.hiding_features(t);
    for (TypeId s = 0; s < sig.type_count(); ++s) {
      if (s == t || !sig.subsumes(t, s) || !cls.is_hiding(s)) continue;
      if (cls.hiding_features(s) != own) return false;
    }
    return true;
  }

  // Step 1: fill the hiding features of the current node, then apply
  // step 2 to each value.
  void step1(Node* n) {
    n = deref(n);
    if (!visited.insert(n).second) return;
    std::vector<FeatId> hf;
    for (FeatId f : sig.feature_order(n->type)) {
      const auto& hfs = cls.hiding_features(n->type);
      if (std::find(hfs.begin(), hfs.end(), f) != hfs.end()) hf.push_back(f);
    }
    fill_approp(sig, heap, n, hf);
    for (FeatId f : hf) step2(deref(n)->arc(f));
  }

  void step2(Node* n) {
    n = deref(n);
    TypeId t = n->type;
    if (cls.is_constrained(t)) {
      if (!has_goal(t, n)) goals.push_back({{RelKind::Main, t}, n});
    } else if (cls.is_hiding(t)) {
      if (subtypes_hide_alike(t)) {
        step1(n);
      } else if (!has_goal(t, n)) {
        goals.push_back({{RelKind::Main, t}, n});
      }
    }
    // simple: nothing at all
  }
};

}  // namespace detail

/// Compute the clause body for a head structure: step 1 applied at the
/// root. The structure is extended in place (hiding features filled).
inline std::vector<Goal> compute_rhs(const TypeClassification& cls, const Signature& sig,
                                     Heap& heap, Node* root) {
  detail::RhsWalker w{cls, sig, heap};
  w.step1(root);
  return std::move(w.goals);
}

/// Step-2 entry at the root, used to seed query goals: a constrained root
/// becomes a goal itself, a hiding root is traversed per step 2b.
inline std::vector<Goal> seed_goals(const TypeClassification& cls, const Signature& sig,
                                    Heap& heap, Node* root) {
  detail::RhsWalker w{cls, sig, heap};
  w.step2(root);
  return std::move(w.goals);
}

/// Drop every goal whose node lies strictly below (one or more arcs) a
/// retained goal's node; earlier goals win on mutual reachability.
inline std::vector<Goal> prune(const std::vector<Goal>& goals, Node* /*head*/) {
  auto strictly_reaches = [](Node* from, Node* to) {
    from = deref(from);
    to = deref(to);
    std::unordered_set<const Node*> seen;
    std::vector<Node*> stack;
    for (auto& [f, v] : from->arcs) {
      (void)f;
      stack.push_back(deref(v));
    }
    while (!stack.empty()) {
      Node* n = stack.back();
      stack.pop_back();
      if (n == to) return true;
      if (!seen.insert(n).second) continue;
      for (auto& [f, v] : n->arcs) {
        (void)f;
        stack.push_back(deref(v));
      }
    }
    return false;
  };

  std::vector<Goal> kept;
  for (const Goal& g : goals) {
    bool dominated = false;
    for (const Goal& k : kept)
      if (strictly_reaches(k.node, g.node)) { dominated = true; break; }
    if (dominated) continue;
    // Late goals can dominate earlier ones (scan both directions).
    std::vector<Goal> next;
    for (const Goal& k : kept)
      if (!strictly_reaches(g.node, k.node)) next.push_back(k);
    next.push_back(g);
    kept = std::move(next);
  }
  return kept;
}

/// Clauses for one minimal type: unit for simple types, one clause per
/// consistent DNF disjunct of the inherited constraint for constrained
/// types, a single bare-node clause for hiding types.
inline std::vector<Clause> compile_type(const Grammar& g, const TypeClassification& cls,
                                        Heap& heap, TypeId t,
                                        std::vector<std::string>* warnings = nullptr) {
  const Signature& sig = g.sig;
  std::vector<Clause> out;
  if (cls.is_simple(t)) {
    out.push_back({{RelKind::Main, t}, heap.make(t), {}});
    return out;
  }
  if (cls.is_hiding(t)) {
    Node* head = heap.make(t);
    auto goals = compute_rhs(cls, sig, heap, head);
    out.push_back({{RelKind::Main, t}, deref(head), prune(goals, head)});
    return out;
  }
  // Constrained: inherit, expand, one clause per consistent disjunct.
  DescPtr d = inherit(g, t);
  auto disjuncts = to_dnf(desugar(sig, d));
  for (const auto& disj : disjuncts) {
    Node* head = desc_to_fs(sig, heap, disj);
    if (!head) {
      if (warnings)
        warnings->push_back("dropping inconsistent disjunct of '" + sig.type_name(t) + "'");
      continue;
    }
    auto goals = compute_rhs(cls, sig, heap, head);
    out.push_back({{RelKind::Main, t}, deref(head), prune(goals, head)});
  }
  if (out.empty())
    throw GrammarError(ErrorKind::InconsistentConstraint,
                       "all disjuncts for type '" + sig.type_name(t) + "' are inconsistent");
  return out;
}

/// The optimized compilation: clauses for every minimal type, dispatch
/// lists for non-minimal ones.
inline Program compile_program(std::shared_ptr<const Grammar> g) {
  Program p;
  p.grammar = g;
  p.heap = std::make_shared<Heap>();
  p.classification = classify(*g);
  p.naive = false;
  const Signature& sig = g->sig;
  for (TypeId t = 0; t < sig.type_count(); ++t) {
    if (sig.is_minimal(t)) {
      p.clauses[{RelKind::Main, t}] = compile_type(*g, p.classification, *p.heap, t,
                                                   &p.warnings);
    } else {
      p.dispatch[t] = sig.minimal_subtypes(t);
    }
  }
  return p;
}

/// The naive tripartite encoding: per-type _cons, _hier and _type
/// relations, with inheritance resolved at run time. Used as an oracle
/// against the optimized program.
inline Program compile_naive(std::shared_ptr<const Grammar> g) {
  Program p;
  p.grammar = g;
  p.heap = std::make_shared<Heap>();
  p.classification = classify(*g);
  p.naive = true;
  const Signature& sig = g->sig;
  Heap& heap = *p.heap;

  auto all_feats = [&](TypeId t) {
    std::vector<FeatId> fs;
    for (const auto& [f, v] : sig.approp_row(t)) {
      (void)v;
      fs.push_back(f);
    }
    return fs;
  };

  // Body of a cons clause: one _type goal per distinct non-root node.
  auto cons_body = [&](Node* root) {
    std::vector<Goal> body;
    std::unordered_set<const Node*> seen;
    root = deref(root);
    seen.insert(root);
    struct Walk {
      std::unordered_set<const Node*>& seen;
      std::vector<Goal>& body;
      void go(Node* n) {
        n = deref(n);
        if (!seen.insert(n).second) return;
        body.push_back({{RelKind::TypeRel, n->type}, n});
        for (auto& [f, v] : n->arcs) {
          (void)f;
          go(v);
        }
      }
    } w{seen, body};
    auto arcs = root->arcs;
    std::sort(arcs.begin(), arcs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [f, v] : arcs) {
      (void)f;
      w.go(v);
    }
    return body;
  };

  for (TypeId t = 0; t < sig.type_count(); ++t) {
    // _cons: the constraints immediately specified for t, with every
    // appropriate feature present so implicitly constrained values are
    // still checked.
    std::vector<Clause>& cons = p.clauses[{RelKind::Cons, t}];
    DescPtr immediate;
    for (std::size_t i = 0; i < g->constraints.size(); ++i) {
      const Constraint& c = g->constraints[i];
      if (c.antecedent != t) continue;
      DescPtr body = rename_vars(c.consequent, "c" + std::to_string(i) + "#");
      immediate = immediate ? Desc::conj(immediate, body) : body;
    }
    DescPtr full = immediate ? Desc::conj(Desc::type_lit(t), immediate)
                             : Desc::type_lit(t);
    for (const auto& disj : to_dnf(desugar(sig, full))) {
      Node* head = desc_to_fs(sig, heap, disj);
      if (!head) {
        p.warnings.push_back("dropping inconsistent disjunct of '" + sig.type_name(t) + "'");
        continue;
      }
      fill_approp(sig, heap, head, all_feats(deref(head)->type));
      cons.push_back({{RelKind::Cons, t}, deref(head), cons_body(head)});
    }
    if (cons.empty())
      throw GrammarError(ErrorKind::InconsistentConstraint,
                         "all disjuncts for type '" + sig.type_name(t) + "' are inconsistent");

    // _hier: t's own constraints plus descent into one immediate subtype
    // (closed world: objects have a minimal type).
    std::vector<Clause>& hier = p.clauses[{RelKind::Hier, t}];
    if (sig.is_minimal(t)) {
      Node* h = heap.make(t);
      hier.push_back({{RelKind::Hier, t}, h, {{{RelKind::Cons, t}, h}}});
    } else {
      for (TypeId s : sig.immediate_subtypes(t)) {
        Node* h = heap.make(t);
        hier.push_back({{RelKind::Hier, t}, h,
                        {{{RelKind::Cons, t}, h}, {{RelKind::Hier, s}, h}}});
      }
    }

    // _type: all constraints on t, including inherited ones, via the
    // hierarchy relation of top.
    Node* h = heap.make(t);
    p.clauses[{RelKind::TypeRel, t}] = {
        {{RelKind::TypeRel, t}, h, {{{RelKind::Hier, sig.top()}, h}}}};
  }
  return p;
}

/// `type(AVM) :- goal1, goal2.` rendering; body-referenced nodes carry tags.
inline std::string dump_clause(const Signature& sig, const Clause& c) {
  PrintOptions opts;
  for (const Goal& g : c.body) opts.force_tags.insert(deref(g.node));
  std::unordered_map<const Node*, int> tags;
  std::string head = print_avm(sig, c.head, opts, &tags);
  std::string out = rel_name(sig, c.rel) + "(" + head + ")";
  if (!c.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < c.body.size(); ++i) {
      if (i) out += ", ";
      out += rel_name(sig, c.body[i].rel) + "(#" +
             std::to_string(tags.at(deref(c.body[i].node))) + ")";
    }
  }
  return out + ".";
}

inline std::string dump_program(const Program& p) {
  const Signature& sig = p.sig();
  std::string out;
  for (const auto& [rel, clauses] : p.clauses)
    for (const Clause& c : clauses) out += dump_clause(sig, c) + "\n";
  for (const auto& [t, mins] : p.dispatch) {
    out += rel_name(sig, {RelKind::Main, t}) + "(X) :- ";
    for (std::size_t i = 0; i < mins.size(); ++i) {
      if (i) out += " ; ";
      out += rel_name(sig, {RelKind::Main, mins[i]}) + "(X)";
    }
    out += ".\n";
  }
  return out;
}

}  // namespace tfs

#endif  // TFS_COMPILER_HPP
