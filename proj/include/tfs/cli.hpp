#ifndef TFS_CLI_HPP
#define TFS_CLI_HPP

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tfs/interpreter.hpp"

namespace tfs::cli {

struct SessionConfig {
  std::string grammar_path;
  std::optional<int> depth_bound;
  std::optional<int> max_solutions;
  std::vector<std::string> suppressed_features;
  bool dump_classes = false;
  bool dump_program_flag = false;
  bool naive = false;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PrintOptions print_options(const Signature& sig,
                                  const std::vector<std::string>& suppress) {
  PrintOptions opts;
  for (const auto& name : suppress) {
    auto f = sig.find_feat(name);
    if (!f) throw GrammarError(ErrorKind::UnknownFeature, name);
    opts.suppress.push_back(*f);
  }
  return opts;
}

inline void dump_classes(std::ostream& os, const Signature& sig,
                         const TypeClassification& cls) {
  auto list = [&](const char* label, TypeClassification::Cat cat) {
    std::vector<std::string> names;
    for (TypeId t = 0; t < sig.type_count(); ++t)
      if (cls.cat[t] == cat) names.push_back(sig.type_name(t));
    std::sort(names.begin(), names.end());
    os << label << ":";
    for (const auto& n : names) os << ' ' << n;
    os << "\n";
  };
  list("constrained", TypeClassification::Constrained);
  list("hiding", TypeClassification::Hiding);
  list("simple", TypeClassification::Simple);
  os << "hiding features:\n";
  std::vector<std::string> rows;
  for (TypeId t = 0; t < sig.type_count(); ++t) {
    if (cls.is_simple(t)) continue;
    std::string row = "  " + sig.type_name(t) + ":";
    for (FeatId f : cls.hiding_features(t)) row += " " + sig.feat_name(f);
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end());
  for (const auto& r : rows) os << r << "\n";
}

inline Program load_program(const SessionConfig& cfg, std::ostream& err) {
  auto grammar = std::make_shared<Grammar>(parse_grammar(read_file(cfg.grammar_path)));
  Program p = cfg.naive ? compile_naive(grammar) : compile_program(grammar);
  for (const auto& w : p.warnings) err << "warning: " << w << "\n";
  return p;
}

/// Runs one query and prints solutions. Returns the number of solutions.
inline int run_query(const Program& prog, const SessionConfig& cfg,
                     const std::string& query, std::ostream& os, std::ostream& err) {
  PrintOptions popts = print_options(prog.sig(), cfg.suppressed_features);
  SolveOptions sopts;
  sopts.depth_bound = cfg.depth_bound;
  QuerySession session(prog, query, sopts);
  int limit = cfg.max_solutions.value_or(1);
  int found = 0;
  while (found < limit) {
    auto sol = session.next();
    if (!sol) break;
    ++found;
    os << print_avm(prog.sig(), sol->root, popts) << "\n";
  }
  if (found == 0) {
    if (session.depth_limit_hit())
      err << "no solutions (search cut by depth bound " << *cfg.depth_bound << ")\n";
    else
      err << "no solutions\n";
  }
  return found;
}

inline void repl(const Program& prog, const SessionConfig& cfg, std::istream& in,
                 std::ostream& os, std::ostream& err) {
  PrintOptions popts = print_options(prog.sig(), cfg.suppressed_features);
  SolveOptions sopts;
  sopts.depth_bound = cfg.depth_bound;
  std::string line;
  for (;;) {
    os << "Query> " << std::flush;
    if (!std::getline(in, line)) break;
    if (line.empty()) continue;
    if (line == ":quit" || line == ":q") break;
    try {
      QuerySession session(prog, line, sopts);
      for (;;) {
        auto sol = session.next();
        if (!sol) {
          os << (session.depth_limit_hit() ? "no (depth bound reached)" : "no") << "\n";
          break;
        }
        os << "Result> " << print_avm(prog.sig(), sol->root, popts) << "\n";
        os << "more? " << std::flush;
        std::string more;
        if (!std::getline(in, more) || more != ";") break;
      }
    } catch (const GrammarError& e) {
      err << "error: " << e.what() << "\n";
    }
  }
}

}  // namespace detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 failure or no solution in batch mode, 2 usage or grammar errors.
inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"type-constraint grammar compiler and interpreter"};
  app.require_subcommand(1);

  SessionConfig cfg;
  std::vector<std::string> queries;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("grammar", cfg.grammar_path, "grammar file")->required();
    cmd->add_option("--depth", cfg.depth_bound, "resolution depth bound");
    cmd->add_option("--max-solutions", cfg.max_solutions, "stop after N solutions");
    cmd->add_option("--suppress", cfg.suppressed_features, "features to hide in output")
        ->delimiter(',');
    cmd->add_flag("--naive", cfg.naive, "use the run-time inheritance encoding");
  };

  CLI::App* compile = app.add_subcommand("compile", "load and compile a grammar");
  add_common(compile);
  compile->add_flag("--dump-classes", cfg.dump_classes, "print the type classification");
  compile->add_flag("--dump-program", cfg.dump_program_flag, "print the compiled clauses");

  CLI::App* query = app.add_subcommand("query", "run batch queries");
  add_common(query);
  query->add_option("-e", queries, "query description")->required();

  CLI::App* repl_cmd = app.add_subcommand("repl", "interactive query loop");
  add_common(repl_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 2;
  }

  try {
    Program prog = detail::load_program(cfg, err);
    if (compile->parsed()) {
      if (cfg.dump_classes) detail::dump_classes(out, prog.sig(), prog.classification);
      if (cfg.dump_program_flag) out << dump_program(prog);
      if (!cfg.dump_classes && !cfg.dump_program_flag)
        out << "compiled " << cfg.grammar_path << " ok\n";
      return 0;
    }
    if (query->parsed()) {
      int found = 0;
      for (const auto& q : queries) found += detail::run_query(prog, cfg, q, out, err);
      return found > 0 ? 0 : 1;
    }
    detail::repl(prog, cfg, in, out, err);
    return 0;
  } catch (const GrammarError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace tfs::cli

#endif  // TFS_CLI_HPP
