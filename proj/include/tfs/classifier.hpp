#ifndef TFS_CLASSIFIER_HPP
#define TFS_CLASSIFIER_HPP

#include <vector>

#include "tfs/grammar.hpp"
#include "tfs/signature.hpp"

namespace tfs {

/// Static partition of the signature's types driving compilation:
/// constrained types need run-time checking, hiding types must be
/// traversed because a constrained value is reachable through their
/// features, simple types need nothing.
struct TypeClassification {
  enum Cat { Constrained, Hiding, Simple };

  std::vector<bool> defined;
  std::vector<Cat> cat;
  std::vector<std::vector<FeatId>> hiding_feats;  // meaningful for non-simple types

  bool is_defined(TypeId t) const { return defined[t]; }
  bool is_constrained(TypeId t) const { return cat[t] == Constrained; }
  bool is_hiding(TypeId t) const { return cat[t] == Hiding; }
  bool is_simple(TypeId t) const { return cat[t] == Simple; }

  const std::vector<FeatId>& hiding_features(TypeId t) const { return hiding_feats[t]; }
};

/// Two types interact iff they have a common subtype.
inline bool interact(const Signature& sig, TypeId t1, TypeId t2) {
  return sig.glb(t1, t2).has_value();
}

inline TypeClassification classify(const Grammar& g) {
  const Signature& sig = g.sig;
  const std::size_t n = sig.type_count();
  TypeClassification cls;
  cls.defined.assign(n, false);
  cls.cat.assign(n, TypeClassification::Simple);
  cls.hiding_feats.assign(n, {});

  for (const auto& c : g.constraints) cls.defined[c.antecedent] = true;

  for (TypeId t = 0; t < n; ++t)
    for (TypeId d = 0; d < n; ++d)
      if (cls.defined[d] && interact(sig, t, d)) {
        cls.cat[t] = TypeClassification::Constrained;
        break;
      }

  // Hiding types: least fixpoint. A worklist keyed on newly non-simple
  // types; t becomes hiding when some subtype carries a feature whose
  // value restriction is constrained or hiding.
  auto non_simple = [&](TypeId t) { return cls.cat[t] != TypeClassification::Simple; };
  std::vector<TypeId> work;
  for (TypeId t = 0; t < n; ++t)
    if (cls.is_constrained(t)) work.push_back(t);
  while (!work.empty()) {
    TypeId v = work.back();
    work.pop_back();
    // Any type subsuming a type with an approp value of v may now hide.
    for (TypeId t0 = 0; t0 < n; ++t0) {
      bool carries = false;
      for (const auto& [f, val] : sig.approp_row(t0)) {
        (void)f;
        if (val == v) { carries = true; break; }
      }
      if (!carries) continue;
      for (TypeId t = 0; t < n; ++t) {
        if (non_simple(t) || !sig.subsumes(t, t0)) continue;
        cls.cat[t] = TypeClassification::Hiding;
        work.push_back(t);
      }
    }
  }

  for (TypeId t = 0; t < n; ++t) {
    if (cls.is_simple(t)) continue;
    for (const auto& [f, val] : sig.approp_row(t))
      if (non_simple(val)) cls.hiding_feats[t].push_back(f);
  }
  return cls;
}

}  // namespace tfs

#endif  // TFS_CLASSIFIER_HPP
