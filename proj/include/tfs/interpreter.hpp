#ifndef TFS_INTERPRETER_HPP
#define TFS_INTERPRETER_HPP

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "tfs/compiler.hpp"

namespace tfs {

struct SolveOptions {
  std::optional<int> depth_bound;
};

struct Stats {
  long long attempts = 0;      // clause head unification attempts
  long long resolutions = 0;   // successful resolutions
  long long visited_hits = 0;
  std::map<Rel, long long> resolutions_by_rel;
  std::vector<Rel> attempt_order;  // head relation of every attempted clause
};

/// A successful derivation's instantiated query structure, copied into its
/// own heap so it survives backtracking.
struct Solution {
  std::shared_ptr<Heap> heap;
  Node* root;
};

/// Depth-first, left-to-right backtracking resolution over a fixed goal
/// list. Pull one solution at a time with next(); the session heap is
/// restored to its entry state once the stream is exhausted.
class Solver {
 public:
  Solver(const Program& prog, Heap& heap, Node* query_root, std::vector<Goal> goals,
         SolveOptions opts = {}, Stats* stats = nullptr)
      : prog_(prog), heap_(heap), root_(query_root), opts_(opts), stats_(stats),
        entry_mark_(heap.mark()) {
    for (auto it = goals.rbegin(); it != goals.rend(); ++it)
      pending_ = std::make_shared<GoalCell>(GoalCell{*it, 0, pending_});
  }

  std::optional<Solution> next() {
    if (done_) return std::nullopt;
    if (started_) {
      if (!backtrack()) return finish();
    }
    started_ = true;
    return run();
  }

  bool depth_limit_hit() const { return depth_exceeded_; }

 private:
  struct GoalCell {
    Goal goal;
    int depth;
    std::shared_ptr<GoalCell> next;
  };
  using GoalList = std::shared_ptr<GoalCell>;

  struct Choice {
    Goal goal;
    int depth;
    GoalList rest;
    std::vector<const Clause*> alts;
    std::size_t next_alt;
    std::size_t trail_mark;
    std::size_t visited_mark;
  };

  std::optional<Solution> run() {
    for (;;) {
      if (!pending_) {
        auto sol_heap = std::make_shared<Heap>();
        Node* copy = copy_fs(*sol_heap, root_);
        return Solution{sol_heap, copy};
      }
      Goal g = pending_->goal;
      int depth = pending_->depth;
      pending_ = pending_->next;
      Node* n = deref(g.node);
      if (visited_match(g.rel, n)) {
        if (stats_) ++stats_->visited_hits;
        continue;
      }
      stack_.push_back({Goal{g.rel, n}, depth, pending_, alternatives(g.rel), 0,
                        heap_.mark(), visited_.size()});
      if (!advance_top()) {
        stack_.pop_back();
        if (!backtrack()) return finish();
      }
    }
  }

  /// Try the remaining alternatives of the top choice point. The heap is
  /// already unwound to the choice's trail mark.
  bool advance_top() {
    Choice& cp = stack_.back();
    while (cp.next_alt < cp.alts.size()) {
      const Clause* c = cp.alts[cp.next_alt++];
      bool counted = c->rel.kind == RelKind::Main || c->rel.kind == RelKind::Cons;
      if (counted && opts_.depth_bound && cp.depth >= *opts_.depth_bound) {
        depth_exceeded_ = true;
        continue;
      }
      if (stats_) {
        ++stats_->attempts;
        stats_->attempt_order.push_back(c->rel);
      }
      std::unordered_map<const Node*, Node*> map;
      Node* head = copy_fs(heap_, c->head, &map);
      if (!unify(prog_.sig(), heap_, head, cp.goal.node)) {
        heap_.undo_to(cp.trail_mark);
        continue;
      }
      visited_.push_back({c->rel, deref(cp.goal.node)});
      if (stats_) {
        ++stats_->resolutions;
        ++stats_->resolutions_by_rel[c->rel];
      }
      GoalList rest = cp.rest;
      int sub_depth = cp.depth + (counted ? 1 : 0);
      for (auto it = c->body.rbegin(); it != c->body.rend(); ++it)
        rest = std::make_shared<GoalCell>(
            GoalCell{Goal{it->rel, map.at(deref(it->node))}, sub_depth, rest});
      pending_ = rest;
      return true;
    }
    return false;
  }

  bool backtrack() {
    while (!stack_.empty()) {
      Choice& cp = stack_.back();
      heap_.undo_to(cp.trail_mark);
      visited_.resize(cp.visited_mark);
      if (advance_top()) return true;
      stack_.pop_back();
    }
    return false;
  }

  std::optional<Solution> finish() {
    done_ = true;
    heap_.undo_to(entry_mark_);
    return std::nullopt;
  }

  bool visited_match(Rel r, const Node* n) const {
    for (const auto& [er, en] : visited_)
      if (er.kind == r.kind && deref(en) == n && prog_.sig().subsumes(r.type, er.type))
        return true;
    return false;
  }

  std::vector<const Clause*> alternatives(Rel r) const {
    std::vector<const Clause*> out;
    if (r.kind == RelKind::Main && !prog_.sig().is_minimal(r.type)) {
      auto it = prog_.dispatch.find(r.type);
      const std::vector<TypeId> mins =
          it != prog_.dispatch.end() ? it->second : prog_.sig().minimal_subtypes(r.type);
      for (TypeId m : mins)
        for (const Clause& c : prog_.clauses_for({RelKind::Main, m})) out.push_back(&c);
    } else {
      for (const Clause& c : prog_.clauses_for(r)) out.push_back(&c);
    }
    return out;
  }

  const Program& prog_;
  Heap& heap_;
  Node* root_;
  SolveOptions opts_;
  Stats* stats_;
  std::size_t entry_mark_;
  GoalList pending_;
  std::vector<Choice> stack_;
  std::vector<std::pair<Rel, Node*>> visited_;
  bool started_ = false, done_ = false, depth_exceeded_ = false;
};

/// Resolve a query description against a program: one solver per DNF
/// disjunct, tried in source order.
class QuerySession {
 public:
  QuerySession(const Program& prog, const DescPtr& query, SolveOptions opts = {})
      : prog_(prog), opts_(opts) {
    disjuncts_ = to_dnf(desugar(prog.sig(), query));
  }

  QuerySession(const Program& prog, const std::string& query, SolveOptions opts = {})
      : QuerySession(prog, parse_description(prog.sig(), query), opts) {}

  std::optional<Solution> next() {
    for (;;) {
      if (solver_) {
        auto s = solver_->next();
        if (s) return s;
        if (solver_->depth_limit_hit()) depth_exceeded_ = true;
        solver_.reset();
      }
      if (next_disjunct_ >= disjuncts_.size()) return std::nullopt;
      start(disjuncts_[next_disjunct_++]);
    }
  }

  /// True once the stream is exhausted and some derivation was cut by the
  /// depth bound (distinguishes bounded exhaustion from plain failure).
  bool depth_limit_hit() const { return depth_exceeded_; }

  const Stats& stats() const { return stats_; }

 private:
  void start(const DescPtr& d) {
    Node* root = desc_to_fs(prog_.sig(), heap_, d);
    if (!root) return;  // unsatisfiable disjunct
    std::vector<Goal> seeds;
    if (prog_.naive) {
      seeds.push_back({{RelKind::TypeRel, deref(root)->type}, root});
    } else {
      seeds = prune(seed_goals(prog_.classification, prog_.sig(), heap_, root), root);
    }
    solver_.emplace(prog_, heap_, root, std::move(seeds), opts_, &stats_);
  }

  const Program& prog_;
  SolveOptions opts_;
  Heap heap_;
  std::vector<DescPtr> disjuncts_;
  std::size_t next_disjunct_ = 0;
  std::optional<Solver> solver_;
  Stats stats_;
  bool depth_exceeded_ = false;
};

}  // namespace tfs

#endif  // TFS_INTERPRETER_HPP
