#ifndef TFS_FSTRUCT_HPP
#define TFS_FSTRUCT_HPP

#include <cstddef>
#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tfs/signature.hpp"

namespace tfs {

/// One node of a feature structure graph. Unification forwards nodes
/// union-find style; always go through deref() before inspecting.
struct Node {
  TypeId type;
  Node* fwd = nullptr;
  std::vector<std::pair<FeatId, Node*>> arcs;

  Node* arc(FeatId f) const {
    for (const auto& [ff, n] : arcs)
      if (ff == f) return n;
    return nullptr;
  }
};

inline Node* deref(Node* n) {
  while (n->fwd) n = n->fwd;
  return n;
}

inline const Node* deref(const Node* n) {
  while (n->fwd) n = n->fwd;
  return n;
}

/// Owns nodes and the undo trail. All destructive operations (forwarding,
/// retyping, arc insertion) go through the heap so they can be unwound to
/// any earlier mark on backtracking.
class Heap {
 public:
  Node* make(TypeId t) {
    nodes_.push_back(Node{t, nullptr, {}});
    return &nodes_.back();
  }

  std::size_t mark() const { return trail_.size(); }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      Entry& e = trail_.back();
      switch (e.kind) {
        case Entry::Forward: e.node->fwd = nullptr; break;
        case Entry::Retype: e.node->type = e.old_type; break;
        case Entry::AddArc: e.node->arcs.pop_back(); break;
      }
      trail_.pop_back();
    }
  }

  void set_forward(Node* from, Node* to) {
    trail_.push_back({Entry::Forward, from, 0});
    from->fwd = to;
  }

  void set_type(Node* n, TypeId t) {
    trail_.push_back({Entry::Retype, n, n->type});
    n->type = t;
  }

  void add_arc(Node* n, FeatId f, Node* value) {
    trail_.push_back({Entry::AddArc, n, 0});
    n->arcs.emplace_back(f, value);
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Entry {
    enum Kind { Forward, Retype, AddArc } kind;
    Node* node;
    TypeId old_type;
  };

  std::deque<Node> nodes_;  // stable addresses
  std::vector<Entry> trail_;
};

namespace detail {

/// Narrow n's type to t and push the stronger value restrictions down
/// through existing arcs. Types only ever get more specific, so this
/// terminates even on cyclic graphs.
inline bool narrow_type(const Signature& sig, Heap& heap, Node* n, TypeId t) {
  n = deref(n);
  if (n->type == t) return true;
  heap.set_type(n, t);
  for (auto& [f, child] : n->arcs) {
    auto restr = sig.approp(t, f);
    if (!restr) return false;  // malformed input
    Node* c = deref(child);
    auto g = sig.glb(c->type, *restr);
    if (!g) return false;
    if (*g != c->type && !narrow_type(sig, heap, c, *g)) return false;
  }
  return true;
}

inline bool unify_rec(const Signature& sig, Heap& heap, Node* a, Node* b) {
  a = deref(a);
  b = deref(b);
  if (a == b) return true;
  auto g = sig.glb(a->type, b->type);
  if (!g) return false;
  heap.set_forward(b, a);
  if (!narrow_type(sig, heap, a, *g)) return false;
  // b's arc list is fixed now that b is forwarded.
  const auto barcs = b->arcs;
  for (const auto& [f, bval] : barcs) {
    if (Node* aval = deref(a)->arc(f)) {
      if (!unify_rec(sig, heap, aval, bval)) return false;
    } else {
      Node* target = deref(a);
      heap.add_arc(target, f, bval);
      auto restr = sig.approp(target->type, f);
      if (!restr) return false;
      Node* c = deref(bval);
      auto cg = sig.glb(c->type, *restr);
      if (!cg) return false;
      if (!narrow_type(sig, heap, c, *cg)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Destructive unification with full undo on failure. On success the two
/// roots dereference to the same graph; on failure the heap is restored to
/// its state at entry.
inline bool unify(const Signature& sig, Heap& heap, Node* a, Node* b) {
  std::size_t m = heap.mark();
  if (detail::unify_rec(sig, heap, a, b)) return true;
  heap.undo_to(m);
  return false;
}

/// Narrow a node to glb(node.type, t); false (with rollback) on clash.
inline bool retype(const Signature& sig, Heap& heap, Node* n, TypeId t) {
  n = deref(n);
  auto g = sig.glb(n->type, t);
  if (!g) return false;
  std::size_t m = heap.mark();
  if (detail::narrow_type(sig, heap, n, *g)) return true;
  heap.undo_to(m);
  return false;
}

/// Add each missing feature in feats with a fresh most-general value.
inline void fill_approp(const Signature& sig, Heap& heap, Node* n,
                        const std::vector<FeatId>& feats) {
  n = deref(n);
  for (FeatId f : feats) {
    auto v = sig.approp(n->type, f);
    if (!v)
      throw GrammarError(ErrorKind::FeatureNotAppropriate,
                         "feature '" + sig.feat_name(f) + "' not appropriate for '" +
                         sig.type_name(n->type) + "'");
    if (!n->arc(f)) heap.add_arc(n, f, heap.make(*v));
  }
}

/// Isomorphic copy with fresh identities; cycles and sharing preserved.
/// The copy is in dereferenced normal form. out_map (optional) receives the
/// deref'd-old-node to new-node mapping.
inline Node* copy_fs(Heap& heap, Node* root,
                     std::unordered_map<const Node*, Node*>* out_map = nullptr) {
  std::unordered_map<const Node*, Node*> local;
  auto& map = out_map ? *out_map : local;
  struct Walker {
    Heap& heap;
    std::unordered_map<const Node*, Node*>& map;
    Node* go(const Node* n) {
      n = deref(n);
      auto it = map.find(n);
      if (it != map.end()) return it->second;
      Node* fresh = heap.make(n->type);
      map.emplace(n, fresh);
      for (const auto& [f, v] : n->arcs) fresh->arcs.emplace_back(f, go(v));
      return fresh;
    }
  } w{heap, map};
  return w.go(root);
}

/// Check appropriateness of every arc in the graph under root.
inline bool well_formed(const Signature& sig, const Node* root,
                        std::string* why = nullptr) {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{deref(root)};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (const auto& [f, v] : n->arcs) {
      auto restr = sig.approp(n->type, f);
      const Node* c = deref(v);
      if (!restr) {
        if (why)
          *why = "feature '" + sig.feat_name(f) + "' not appropriate on '" +
                 sig.type_name(n->type) + "'";
        return false;
      }
      if (!sig.subsumes(*restr, c->type)) {
        if (why)
          *why = "value of '" + sig.feat_name(f) + "' on '" + sig.type_name(n->type) +
                 "' has type '" + sig.type_name(c->type) + "' not below '" +
                 sig.type_name(*restr) + "'";
        return false;
      }
      stack.push_back(c);
    }
  }
  return true;
}

struct PrintOptions {
  std::vector<FeatId> suppress;
  /// Nodes that must carry a tag even if unshared (used by the program
  /// dump so clause bodies can reference head nodes).
  std::unordered_set<const Node*> force_tags;
};

namespace detail {

struct AvmPrinter {
  const Signature& sig;
  const PrintOptions& opts;
  std::unordered_map<const Node*, int> tags;     // node -> tag number
  std::unordered_map<const Node*, int> printed;  // tagged nodes already emitted
  int next_tag = 1;

  bool suppressed(FeatId f) const {
    for (FeatId s : opts.suppress)
      if (s == f) return true;
    return false;
  }

  std::vector<std::pair<FeatId, const Node*>> visible_arcs(const Node* n) const {
    std::vector<std::pair<FeatId, const Node*>> out;
    for (const auto& [f, v] : n->arcs)
      if (!suppressed(f)) out.emplace_back(f, deref(v));
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

  // First pass: nodes reached twice (sharing or cycles) get tags,
  // numbered in first-visit order.
  void scan(const Node* n, std::unordered_set<const Node*>& seen) {
    n = deref(n);
    if (!seen.insert(n).second) {
      if (!tags.count(n)) tags[n] = 0;
      return;
    }
    if (opts.force_tags.count(n)) tags[n] = 0;
    for (const auto& [f, v] : visible_arcs(n)) {
      (void)f;
      scan(v, seen);
    }
  }

  void number(const Node* n, std::unordered_set<const Node*>& seen) {
    n = deref(n);
    if (!seen.insert(n).second) return;
    auto it = tags.find(n);
    if (it != tags.end() && it->second == 0) it->second = next_tag++;
    for (const auto& [f, v] : visible_arcs(n)) {
      (void)f;
      number(v, seen);
    }
  }

  void emit(std::ostream& os, const Node* n, bool at_root) {
    n = deref(n);
    auto it = tags.find(n);
    if (it != tags.end()) {
      if (printed.count(n)) {
        os << '#' << it->second;
        return;
      }
      printed[n] = 1;
      os << '#' << it->second << '=';
    }
    auto arcs = visible_arcs(n);
    if (arcs.empty() && !at_root && it == tags.end()) {
      os << sig.type_name(n->type);
      return;
    }
    os << '[' << sig.type_name(n->type);
    for (const auto& [f, v] : arcs) {
      os << ' ' << sig.feat_name(f) << ':';
      emit(os, v, false);
    }
    os << ']';
  }
};

}  // namespace detail

/// Deterministic textual AVM. Tags (#n) appear exactly on shared or cyclic
/// nodes, numbered in depth-first first-visit order with features in
/// declaration order.
inline std::string print_avm(const Signature& sig, const Node* root,
                             const PrintOptions& opts = {},
                             std::unordered_map<const Node*, int>* tags_out = nullptr) {
  detail::AvmPrinter p{sig, opts};
  {
    std::unordered_set<const Node*> seen;
    p.scan(root, seen);
  }
  {
    std::unordered_set<const Node*> seen;
    p.number(root, seen);
  }
  std::ostringstream os;
  p.emit(os, root, true);
  if (tags_out) *tags_out = p.tags;
  return os.str();
}

/// Canonical string for the graph reachable from root. Arc labels are
/// functional, so two structures are isomorphic iff their canonical forms
/// are equal.
inline std::string canonical_form(const Signature& sig, const Node* root) {
  std::unordered_map<const Node*, int> ids;
  std::ostringstream os;
  struct Walker {
    const Signature& sig;
    std::unordered_map<const Node*, int>& ids;
    std::ostringstream& os;
    void go(const Node* n) {
      n = deref(n);
      auto it = ids.find(n);
      if (it != ids.end()) {
        os << '@' << it->second;
        return;
      }
      int id = static_cast<int>(ids.size());
      ids.emplace(n, id);
      os << id << ':' << sig.type_name(n->type) << '(';
      auto arcs = n->arcs;
      std::sort(arcs.begin(), arcs.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      bool first = true;
      for (const auto& [f, v] : arcs) {
        if (!first) os << ' ';
        first = false;
        os << sig.feat_name(f) << '=';
        go(v);
      }
      os << ')';
    }
  } w{sig, ids, os};
  w.go(root);
  return os.str();
}

}  // namespace tfs

#endif  // TFS_FSTRUCT_HPP
