#ifndef TFS_SIGNATURE_HPP
#define TFS_SIGNATURE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfs/errors.hpp"

namespace tfs {

using TypeId = std::uint32_t;
using FeatId = std::uint32_t;

inline constexpr TypeId kNoType = static_cast<TypeId>(-1);

/// The type hierarchy plus appropriateness conditions, closed-world.
/// Immutable once built; built through SignatureBuilder below.
class Signature {
 public:
  std::size_t type_count() const { return names_.size(); }
  std::size_t feat_count() const { return feat_names_.size(); }

  const std::string& type_name(TypeId t) const { return names_[t]; }
  const std::string& feat_name(FeatId f) const { return feat_names_[f]; }

  std::optional<TypeId> find_type(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<FeatId> find_feat(const std::string& name) const {
    auto it = feat_ids_.find(name);
    if (it == feat_ids_.end()) return std::nullopt;
    return it->second;
  }

  TypeId type_id(const std::string& name) const {
    auto t = find_type(name);
    if (!t) throw GrammarError(ErrorKind::UnknownType, name);
    return *t;
  }

  FeatId feat_id(const std::string& name) const {
    auto f = find_feat(name);
    if (!f) throw GrammarError(ErrorKind::UnknownFeature, name);
    return *f;
  }

  TypeId top() const { return top_; }

  const std::vector<TypeId>& immediate_subtypes(TypeId t) const { return subs_[t]; }
  const std::vector<TypeId>& immediate_supertypes(TypeId t) const { return supers_[t]; }

  bool is_minimal(TypeId t) const { return subs_[t].empty(); }

  /// True iff t2 lies at or below t1 in the hierarchy.
  bool subsumes(TypeId t1, TypeId t2) const { return subsumes_[t1][t2]; }

  /// Greatest common subtype, or nullopt when the two types have no common
  /// subtype. Uniqueness is guaranteed by load-time validation.
  std::optional<TypeId> glb(TypeId t1, TypeId t2) const {
    TypeId g = glb_[t1 * type_count() + t2];
    if (g == kNoType) return std::nullopt;
    return g;
  }

  /// All minimal types at or below t, depth-first in declaration order,
  /// then stable-reordered by any order_types directive.
  std::vector<TypeId> minimal_subtypes(TypeId t) const {
    std::vector<TypeId> out;
    std::vector<bool> seen(type_count(), false);
    collect_minimal(t, seen, out);
    std::stable_sort(out.begin(), out.end(), [this](TypeId a, TypeId b) {
      return priority_[a] < priority_[b];
    });
    return out;
  }

  /// Full appropriateness row for t (inherited features included), sorted by
  /// FeatId, i.e. by feature declaration order.
  const std::vector<std::pair<FeatId, TypeId>>& approp_row(TypeId t) const {
    return approp_[t];
  }

  std::optional<TypeId> approp(TypeId t, FeatId f) const {
    for (const auto& [ff, v] : approp_[t])
      if (ff == f) return v;
    return std::nullopt;
  }

  /// The unique most general type carrying feature f.
  TypeId introducer(FeatId f) const { return introducer_[f]; }

  /// Position of t in a topological order (top first); used to order
  /// inherited constraints deterministically.
  int topo_index(TypeId t) const { return topo_index_[t]; }

  /// Traversal order of features at nodes typed t: order_feats directive
  /// first, remaining appropriate features in declaration order.
  std::vector<FeatId> feature_order(TypeId t) const {
    std::vector<FeatId> out;
    auto it = feat_order_.find(t);
    if (it != feat_order_.end()) {
      for (FeatId f : it->second)
        if (approp(t, f)) out.push_back(f);
    }
    for (const auto& [f, v] : approp_[t]) {
      (void)v;
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    return out;
  }

 private:
  friend class SignatureBuilder;

  void collect_minimal(TypeId t, std::vector<bool>& seen, std::vector<TypeId>& out) const {
    if (seen[t]) return;
    seen[t] = true;
    if (subs_[t].empty()) {
      out.push_back(t);
      return;
    }
    for (TypeId s : subs_[t]) collect_minimal(s, seen, out);
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, TypeId> ids_;
  std::vector<std::string> feat_names_;
  std::unordered_map<std::string, FeatId> feat_ids_;
  std::vector<std::vector<TypeId>> subs_;
  std::vector<std::vector<TypeId>> supers_;
  std::vector<std::vector<bool>> subsumes_;
  std::vector<TypeId> glb_;  // type_count^2 table, kNoType = inconsistent
  std::vector<std::vector<std::pair<FeatId, TypeId>>> approp_;
  std::vector<TypeId> introducer_;
  std::vector<int> topo_index_;
  std::vector<int> priority_;  // order_types rank; declaration index otherwise
  std::unordered_map<TypeId, std::vector<FeatId>> feat_order_;
  TypeId top_ = kNoType;
};

/// Accumulates declarations, then validates everything in finish().
class SignatureBuilder {
 public:
  TypeId intern_type(const std::string& name) {
    auto it = sig_.ids_.find(name);
    if (it != sig_.ids_.end()) return it->second;
    TypeId t = static_cast<TypeId>(sig_.names_.size());
    sig_.names_.push_back(name);
    sig_.ids_.emplace(name, t);
    sig_.subs_.emplace_back();
    sig_.supers_.emplace_back();
    declared_.push_back(false);
    intro_.emplace_back();
    return t;
  }

  FeatId intern_feat(const std::string& name) {
    auto it = sig_.feat_ids_.find(name);
    if (it != sig_.feat_ids_.end()) return it->second;
    FeatId f = static_cast<FeatId>(sig_.feat_names_.size());
    sig_.feat_names_.push_back(name);
    sig_.feat_ids_.emplace(name, f);
    return f;
  }

  /// One `t sub [s1,...] intro [f1:v1,...]` declaration.
  void declare(TypeId t, const std::vector<TypeId>& subtypes,
               const std::vector<std::pair<FeatId, TypeId>>& intro, int line = 0) {
    if (declared_[t])
      throw GrammarError(ErrorKind::SyntaxError,
                         "type '" + sig_.names_[t] + "' declared twice", line, 1);
    declared_[t] = true;
    for (TypeId s : subtypes) {
      sig_.subs_[t].push_back(s);
      sig_.supers_[s].push_back(t);
    }
    intro_[t] = intro;
  }

  void order_types(const std::vector<TypeId>& order) { type_order_ = order; }

  void order_feats(TypeId t, const std::vector<FeatId>& order) {
    sig_.feat_order_[t] = order;
  }

  Signature finish() {
    const std::size_t n = sig_.names_.size();
    for (std::size_t t = 0; t < n; ++t)
      if (!declared_[t])
        sig_.subs_[t].clear();  // undeclared types are leaves

    find_root();
    topo_sort();  // also detects cycles
    compute_subsumption();
    compute_glb();
    compute_approp();
    compute_priority();
    return std::move(sig_);
  }

 private:
  void find_root() {
    const std::size_t n = sig_.names_.size();
    auto top = sig_.ids_.find("top");
    if (top == sig_.ids_.end())
      throw GrammarError(ErrorKind::MissingRoot, "no type named 'top'");
    sig_.top_ = top->second;
    for (TypeId t = 0; t < n; ++t)
      if (t != sig_.top_ && sig_.supers_[t].empty())
        throw GrammarError(ErrorKind::MissingRoot,
                           "type '" + sig_.names_[t] + "' has no supertype");
  }

  void topo_sort() {
    const std::size_t n = sig_.names_.size();
    sig_.topo_index_.assign(n, -1);
    std::vector<int> state(n, 0);  // 0 unvisited, 1 on stack, 2 done
    std::vector<TypeId> order;
    // Iterative DFS from top; declaration order among siblings.
    struct Frame { TypeId t; std::size_t next; };
    std::vector<Frame> stack{{sig_.top_, 0}};
    state[sig_.top_] = 1;
    while (!stack.empty()) {
      Frame& fr = stack.back();
      if (fr.next == 0) order.push_back(fr.t);
      if (fr.next < sig_.subs_[fr.t].size()) {
        TypeId s = sig_.subs_[fr.t][fr.next++];
        if (state[s] == 1)
          throw GrammarError(ErrorKind::CycleInHierarchy,
                             "cycle through '" + sig_.names_[s] + "'");
        if (state[s] == 0) {
          state[s] = 1;
          stack.push_back({s, 0});
        }
      } else {
        state[fr.t] = 2;
        stack.pop_back();
      }
    }
    for (TypeId t = 0; t < n; ++t)
      if (state[t] == 0)
        throw GrammarError(ErrorKind::MissingRoot,
                           "type '" + sig_.names_[t] + "' unreachable from top");
    // DFS preorder is a valid topological order for a DAG only per-path;
    // recompute by longest-path layering to be safe with multiple inheritance.
    std::vector<int> depth(n, 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (TypeId t = 0; t < n; ++t)
        for (TypeId s : sig_.subs_[t])
          if (depth[s] < depth[t] + 1) { depth[s] = depth[t] + 1; changed = true; }
    }
    std::vector<TypeId> all(n);
    for (TypeId t = 0; t < n; ++t) all[t] = t;
    std::stable_sort(all.begin(), all.end(), [&](TypeId a, TypeId b) {
      return depth[a] < depth[b];
    });
    for (std::size_t i = 0; i < n; ++i) sig_.topo_index_[all[i]] = static_cast<int>(i);
  }

  void compute_subsumption() {
    const std::size_t n = sig_.names_.size();
    sig_.subsumes_.assign(n, std::vector<bool>(n, false));
    // Process in reverse topological order: subtypes first.
    std::vector<TypeId> order(n);
    for (TypeId t = 0; t < n; ++t) order[sig_.topo_index_[t]] = t;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      TypeId t = *it;
      sig_.subsumes_[t][t] = true;
      for (TypeId s : sig_.subs_[t])
        for (TypeId x = 0; x < n; ++x)
          if (sig_.subsumes_[s][x]) sig_.subsumes_[t][x] = true;
    }
  }

  void compute_glb() {
    const std::size_t n = sig_.names_.size();
    sig_.glb_.assign(n * n, kNoType);
    for (TypeId a = 0; a < n; ++a) {
      for (TypeId b = a; b < n; ++b) {
        std::vector<TypeId> common;
        for (TypeId x = 0; x < n; ++x)
          if (sig_.subsumes_[a][x] && sig_.subsumes_[b][x]) common.push_back(x);
        if (common.empty()) continue;
        // Maximal elements of the common-subtype set.
        std::vector<TypeId> maximal;
        for (TypeId x : common) {
          bool dominated = false;
          for (TypeId y : common)
            if (y != x && sig_.subsumes_[y][x]) { dominated = true; break; }
          if (!dominated) maximal.push_back(x);
        }
        if (maximal.size() != 1)
          throw GrammarError(ErrorKind::NonUniqueGLB,
                             "types '" + sig_.names_[a] + "' and '" + sig_.names_[b] +
                             "' have no unique greatest common subtype");
        sig_.glb_[a * n + b] = maximal[0];
        sig_.glb_[b * n + a] = maximal[0];
      }
    }
  }

  void compute_approp() {
    const std::size_t n = sig_.names_.size();
    sig_.approp_.assign(n, {});
    sig_.introducer_.assign(sig_.feat_names_.size(), kNoType);
    std::vector<TypeId> order(n);
    for (TypeId t = 0; t < n; ++t) order[sig_.topo_index_[t]] = t;
    for (TypeId t : order) {
      // Inherit from all supertypes; conflicting restrictions meet via glb.
      std::unordered_map<FeatId, TypeId> row;
      for (TypeId sup : sig_.supers_[t]) {
        for (const auto& [f, v] : sig_.approp_[sup]) {
          auto it = row.find(f);
          if (it == row.end()) {
            row[f] = v;
          } else {
            TypeId g = sig_.glb_[it->second * n + v];
            if (g == kNoType)
              throw GrammarError(ErrorKind::NonMonotonicApprop,
                                 "inherited restrictions for feature '" +
                                 sig_.feat_names_[f] + "' on '" + sig_.names_[t] +
                                 "' are inconsistent");
            it->second = g;
          }
        }
      }
      for (const auto& [f, v] : intro_[t]) {
        auto it = row.find(f);
        if (it == row.end()) {
          TypeId intro_at = sig_.introducer_[f];
          if (intro_at != kNoType && !sig_.subsumes_[intro_at][t])
            throw GrammarError(ErrorKind::FeatureIntroductionViolation,
                               "feature '" + sig_.feat_names_[f] +
                               "' introduced at both '" + sig_.names_[intro_at] +
                               "' and '" + sig_.names_[t] + "'");
          if (intro_at == kNoType) sig_.introducer_[f] = t;
          row[f] = v;
        } else {
          if (!sig_.subsumes_[it->second][v])
            throw GrammarError(ErrorKind::NonMonotonicApprop,
                               "feature '" + sig_.feat_names_[f] + "' on '" +
                               sig_.names_[t] + "' loosens the inherited restriction");
          it->second = v;
        }
      }
      auto& out = sig_.approp_[t];
      out.assign(row.begin(), row.end());
      std::sort(out.begin(), out.end());
    }
  }

  void compute_priority() {
    const std::size_t n = sig_.names_.size();
    // Types named in order_types come first, in directive order; everything
    // else keeps its depth-first declaration order (the sort is stable).
    sig_.priority_.assign(n, static_cast<int>(n));
    for (std::size_t i = 0; i < type_order_.size(); ++i)
      sig_.priority_[type_order_[i]] = static_cast<int>(i);
  }

  Signature sig_;
  std::vector<bool> declared_;
  std::vector<std::vector<std::pair<FeatId, TypeId>>> intro_;
  std::vector<TypeId> type_order_;
};

}  // namespace tfs

#endif  // TFS_SIGNATURE_HPP
