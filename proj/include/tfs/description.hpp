#ifndef TFS_DESCRIPTION_HPP
#define TFS_DESCRIPTION_HPP

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "tfs/fstruct.hpp"
#include "tfs/signature.hpp"

namespace tfs {

/// AVM description AST. Lowercase identifiers in the concrete syntax are
/// type literals, uppercase ones are variables; `f:d` is a feature value,
/// `,` conjunction, `;` disjunction, `[a,b|T]` list sugar.
struct Desc;
using DescPtr = std::shared_ptr<const Desc>;

struct Desc {
  enum Kind { Type, Feat, Conj, Disj, Var, List } kind;

  TypeId type = kNoType;          // Type
  FeatId feat = 0;                // Feat
  DescPtr a, b;                   // Feat value / Conj / Disj operands
  std::string var;                // Var
  std::vector<DescPtr> elems;     // List
  DescPtr tail;                   // List (optional)
  int line = 0, col = 0;

  static DescPtr type_lit(TypeId t, int line = 0, int col = 0) {
    auto d = std::make_shared<Desc>();
    d->kind = Type; d->type = t; d->line = line; d->col = col;
    return d;
  }
  static DescPtr feat_val(FeatId f, DescPtr v, int line = 0, int col = 0) {
    auto d = std::make_shared<Desc>();
    d->kind = Feat; d->feat = f; d->a = std::move(v); d->line = line; d->col = col;
    return d;
  }
  static DescPtr conj(DescPtr x, DescPtr y) {
    auto d = std::make_shared<Desc>();
    d->kind = Conj; d->line = x->line; d->col = x->col;
    d->a = std::move(x); d->b = std::move(y);
    return d;
  }
  static DescPtr disj(DescPtr x, DescPtr y) {
    auto d = std::make_shared<Desc>();
    d->kind = Disj; d->line = x->line; d->col = x->col;
    d->a = std::move(x); d->b = std::move(y);
    return d;
  }
  static DescPtr variable(std::string name, int line = 0, int col = 0) {
    auto d = std::make_shared<Desc>();
    d->kind = Var; d->var = std::move(name); d->line = line; d->col = col;
    return d;
  }
  static DescPtr list(std::vector<DescPtr> elems, DescPtr tail, int line = 0, int col = 0) {
    auto d = std::make_shared<Desc>();
    d->kind = List; d->elems = std::move(elems); d->tail = std::move(tail);
    d->line = line; d->col = col;
    return d;
  }
};

/// Rewrite list sugar into ne_list/hd/tl chains ending in e_list (or the
/// explicit tail). The signature must declare those names when sugar is used.
inline DescPtr desugar(const Signature& sig, const DescPtr& d) {
  switch (d->kind) {
    case Desc::Type:
    case Desc::Var:
      return d;
    case Desc::Feat:
      return Desc::feat_val(d->feat, desugar(sig, d->a), d->line, d->col);
    case Desc::Conj:
      return Desc::conj(desugar(sig, d->a), desugar(sig, d->b));
    case Desc::Disj:
      return Desc::disj(desugar(sig, d->a), desugar(sig, d->b));
    case Desc::List: {
      auto need_type = [&](const char* name) {
        auto t = sig.find_type(name);
        if (!t)
          throw GrammarError(ErrorKind::UnknownType,
                             std::string("list sugar needs type '") + name + "'",
                             d->line, d->col);
        return *t;
      };
      auto need_feat = [&](const char* name) {
        auto f = sig.find_feat(name);
        if (!f)
          throw GrammarError(ErrorKind::UnknownFeature,
                             std::string("list sugar needs feature '") + name + "'",
                             d->line, d->col);
        return *f;
      };
      DescPtr out = d->tail ? desugar(sig, d->tail)
                            : Desc::type_lit(need_type("e_list"), d->line, d->col);
      TypeId ne = need_type("ne_list");
      FeatId hd = need_feat("hd"), tl = need_feat("tl");
      for (auto it = d->elems.rbegin(); it != d->elems.rend(); ++it) {
        DescPtr cell = Desc::conj(
            Desc::type_lit(ne, (*it)->line, (*it)->col),
            Desc::conj(Desc::feat_val(hd, desugar(sig, *it), (*it)->line, (*it)->col),
                       Desc::feat_val(tl, out, (*it)->line, (*it)->col)));
        out = cell;
      }
      return out;
    }
  }
  return d;
}

/// Disjunctive normal form: a list of disjunction-free descriptions whose
/// left-to-right order follows the source (it becomes clause order).
/// Input must be desugared. Throws when the expansion exceeds limit.
inline std::vector<DescPtr> to_dnf(const DescPtr& d, std::size_t limit = 4096) {
  std::vector<DescPtr> out;
  switch (d->kind) {
    case Desc::Type:
    case Desc::Var:
      out.push_back(d);
      break;
    case Desc::Feat: {
      for (const auto& v : to_dnf(d->a, limit))
        out.push_back(Desc::feat_val(d->feat, v, d->line, d->col));
      break;
    }
    case Desc::Disj: {
      auto l = to_dnf(d->a, limit);
      auto r = to_dnf(d->b, limit);
      out.reserve(l.size() + r.size());
      for (auto& x : l) out.push_back(std::move(x));
      for (auto& x : r) out.push_back(std::move(x));
      break;
    }
    case Desc::Conj: {
      auto l = to_dnf(d->a, limit);
      auto r = to_dnf(d->b, limit);
      for (const auto& x : l)
        for (const auto& y : r)
          out.push_back(Desc::conj(x, y));
      break;
    }
    case Desc::List:
      throw GrammarError(ErrorKind::SyntaxError, "to_dnf on sugared description",
                         d->line, d->col);
  }
  if (out.size() > limit)
    throw GrammarError(ErrorKind::DisjunctLimitExceeded,
                       "DNF expansion exceeds " + std::to_string(limit) + " disjuncts",
                       d->line, d->col);
  return out;
}

/// Rename every variable with the given prefix; keeps constraint scopes
/// apart when consequents from several constraints are conjoined.
inline DescPtr rename_vars(const DescPtr& d, const std::string& prefix) {
  switch (d->kind) {
    case Desc::Type:
      return d;
    case Desc::Var:
      return Desc::variable(prefix + d->var, d->line, d->col);
    case Desc::Feat:
      return Desc::feat_val(d->feat, rename_vars(d->a, prefix), d->line, d->col);
    case Desc::Conj:
      return Desc::conj(rename_vars(d->a, prefix), rename_vars(d->b, prefix));
    case Desc::Disj:
      return Desc::disj(rename_vars(d->a, prefix), rename_vars(d->b, prefix));
    case Desc::List: {
      std::vector<DescPtr> elems;
      for (const auto& e : d->elems) elems.push_back(rename_vars(e, prefix));
      return Desc::list(std::move(elems),
                        d->tail ? rename_vars(d->tail, prefix) : nullptr,
                        d->line, d->col);
    }
  }
  return d;
}

namespace detail {

inline bool build_desc(const Signature& sig, Heap& heap, Node* node, const DescPtr& d,
                       std::unordered_map<std::string, Node*>& env) {
  switch (d->kind) {
    case Desc::Type:
      return retype(sig, heap, node, d->type);
    case Desc::Var: {
      auto it = env.find(d->var);
      if (it == env.end()) {
        env.emplace(d->var, deref(node));
        return true;
      }
      return unify(sig, heap, node, it->second);
    }
    case Desc::Conj:
      return build_desc(sig, heap, node, d->a, env) &&
             build_desc(sig, heap, deref(node), d->b, env);
    case Desc::Feat: {
      Node* n = deref(node);
      if (!sig.approp(n->type, d->feat)) {
        // Coerce to the feature's introducer; clash means this disjunct
        // is unsatisfiable.
        TypeId intro = sig.introducer(d->feat);
        if (intro == kNoType)
          throw GrammarError(ErrorKind::FeatureNotAppropriate,
                             "feature '" + sig.feat_name(d->feat) +
                             "' is appropriate for no type", d->line, d->col);
        if (!retype(sig, heap, n, intro)) return false;
        n = deref(n);
      }
      Node* child = n->arc(d->feat);
      if (!child) {
        child = heap.make(*sig.approp(n->type, d->feat));
        heap.add_arc(n, d->feat, child);
      }
      return build_desc(sig, heap, child, d->a, env);
    }
    case Desc::Disj:
    case Desc::List:
      throw GrammarError(ErrorKind::SyntaxError,
                         "desc_to_fs needs a desugared, disjunction-free description",
                         d->line, d->col);
  }
  return false;
}

}  // namespace detail

/// Build the most general feature structure satisfying a conjunctive,
/// desugared description. Returns nullptr on type clash. Shared variables
/// produce reentrancy; a feature mention coerces the node to the feature's
/// introducer type.
inline Node* desc_to_fs(const Signature& sig, Heap& heap, const DescPtr& d) {
  std::unordered_map<std::string, Node*> env;
  Node* root = heap.make(sig.top());
  std::size_t m = heap.mark();
  if (!detail::build_desc(sig, heap, root, d, env)) {
    heap.undo_to(m);
    return nullptr;
  }
  return deref(root);
}

}  // namespace tfs

#endif  // TFS_DESCRIPTION_HPP
