#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "tfs/description.hpp"
#include "tfs/grammar.hpp"

using namespace tfs;
using tfs::test::at;
using tfs::test::grammar_text;
using tfs::test::satisfies;

namespace {

struct Fix {
  Signature sig;
  Heap heap;
  Fix() : sig(load_signature(grammar_text("append_c.gram"))) {}

  DescPtr parse(const std::string& s) { return parse_description(sig, s); }

  std::string build(const std::string& s) {
    Node* n = desc_to_fs(sig, heap, parse(s));
    REQUIRE(n != nullptr);
    return print_avm(sig, n);
  }
};

}  // namespace

TEST_CASE("descriptions build the most general satisfying structure") {
  Fix fx;
  SECTION("type literal") { REQUIRE(fx.build("ne_list") == "[ne_list]"); }
  SECTION("feature value") {
    REQUIRE(fx.build("ne_list, hd:a") == "[ne_list hd:a]");
  }
  SECTION("conjunction merges onto one node") {
    REQUIRE(fx.build("ne_list, hd:a, tl:e_list") == "[ne_list hd:a tl:e_list]");
  }
  SECTION("shared variables create reentrancy") {
    REQUIRE(fx.build("append_c, arg2:(X, list), arg3:X") ==
            "[append_c arg2:#1=[list] arg3:#1]");
  }
  SECTION("V=primary binds the variable to that substructure") {
    REQUIRE(fx.build("append_c, arg1:(X=(ne_list, hd:a)), arg3:X") ==
            "[append_c arg1:#1=[ne_list hd:a] arg3:#1]");
  }
  SECTION("cyclic description") {
    REQUIRE(fx.build("X=(ne_list, hd:a, tl:X)") == "#1=[ne_list hd:a tl:#1]");
  }
  SECTION("a variable reached twice narrows both occurrences") {
    REQUIRE(fx.build("append_c, arg1:X, arg2:X, arg1:e_list") ==
            "[append_c arg1:#1=[e_list] arg2:#1]");
  }
}

TEST_CASE("a feature mention coerces the node to the introducer type") {
  Fix fx;
  REQUIRE(fx.build("hd:a") == "[ne_list hd:a]");
  REQUIRE(fx.build("arg1:[a]") == "[append_c arg1:[ne_list hd:a tl:e_list]]");
  // Coercion can still clash.
  Node* n = desc_to_fs(fx.sig, fx.heap, fx.parse("e_list, hd:a"));
  REQUIRE(n == nullptr);
}

TEST_CASE("unsatisfiable conjunctions yield nullptr and a clean heap") {
  Fix fx;
  std::size_t mark = fx.heap.mark();
  REQUIRE(desc_to_fs(fx.sig, fx.heap, fx.parse("e_list, ne_list")) == nullptr);
  REQUIRE(desc_to_fs(fx.sig, fx.heap, fx.parse("arg1:e_list, arg1:ne_list")) == nullptr);
  REQUIRE(desc_to_fs(fx.sig, fx.heap, fx.parse("X=(a), tl:X")) == nullptr);
  REQUIRE(fx.heap.mark() == mark);
}

TEST_CASE("list sugar desugars to ne_list/hd/tl chains") {
  Fix fx;
  SECTION("empty list") { REQUIRE(fx.build("arg1:[]") == "[append_c arg1:e_list]"); }
  SECTION("elements") {
    REQUIRE(fx.build("[a, b]") ==
            "[ne_list hd:a tl:[ne_list hd:b tl:e_list]]");
  }
  SECTION("explicit tail") {
    REQUIRE(fx.build("[a | T]") == "[ne_list hd:a tl:list]");
    REQUIRE(fx.build("append_c, arg1:[a | T], arg3:T") ==
            "[append_c arg1:[ne_list hd:a tl:#1=[list]] arg3:#1]");
  }
  SECTION("nested structure in elements") {
    REQUIRE(fx.build("[(append_c, arg1:e_list)]") ==
            "[ne_list hd:[append_c arg1:e_list] tl:e_list]");
  }
  SECTION("sugar requires the list types") {
    Signature bare = load_signature("top sub [a].\na sub [].\n");
    REQUIRE_THROWS_MATCHES(parse_description(bare, "[a]"), GrammarError,
        Catch::Matchers::Predicate<GrammarError>([](const GrammarError& e) {
          return e.kind() == ErrorKind::UnknownType || e.kind() == ErrorKind::UnknownFeature;
        }));
  }
}

TEST_CASE("to_dnf expands left to right") {
  Fix fx;
  auto d = fx.parse("(arg1:e_list ; arg1:ne_list), (arg2:e_list ; arg2:ne_list)");
  auto dnf = to_dnf(d);
  REQUIRE(dnf.size() == 4);
  std::vector<std::string> rendered;
  for (const auto& disj : dnf) {
    Node* n = desc_to_fs(fx.sig, fx.heap, disj);
    REQUIRE(n != nullptr);
    rendered.push_back(print_avm(fx.sig, n));
  }
  REQUIRE(rendered == std::vector<std::string>{
      "[append_c arg1:e_list arg2:e_list]",
      "[append_c arg1:e_list arg2:ne_list]",
      "[append_c arg1:ne_list arg2:e_list]",
      "[append_c arg1:ne_list arg2:ne_list]"});

  SECTION("every disjunct still satisfies the original description") {
    for (const auto& disj : dnf) {
      Node* n = desc_to_fs(fx.sig, fx.heap, disj);
      REQUIRE(satisfies(fx.sig, n, d));
    }
  }
}

TEST_CASE("to_dnf counts disjuncts multiplicatively and enforces the limit") {
  Fix fx;
  std::string q = "(hd:a ; hd:b)";
  std::string three = q + ", " + q + ", " + q;
  REQUIRE(to_dnf(fx.parse(three)).size() == 8);

  std::string big = q;
  for (int i = 0; i < 12; ++i) big += ", " + q;  // 2^13 = 8192 > 4096
  REQUIRE_THROWS_MATCHES(to_dnf(fx.parse(big)), GrammarError,
      Catch::Matchers::Predicate<GrammarError>([](const GrammarError& e) {
        return e.kind() == ErrorKind::DisjunctLimitExceeded;
      }));
}

TEST_CASE("disjunction under a feature distributes outward") {
  Fix fx;
  auto dnf = to_dnf(fx.parse("arg1:(e_list ; ne_list)"));
  REQUIRE(dnf.size() == 2);
  Node* first = desc_to_fs(fx.sig, fx.heap, dnf[0]);
  REQUIRE(print_avm(fx.sig, first) == "[append_c arg1:e_list]");
}

TEST_CASE("rename_vars keeps separately scoped variables apart") {
  Fix fx;
  auto d = fx.parse("arg1:X, arg2:X");
  auto scoped = Desc::conj(rename_vars(d, "p#"), rename_vars(d, "q#"));
  Node* n = desc_to_fs(fx.sig, fx.heap, scoped);
  REQUIRE(n != nullptr);
  // Same-scope occurrences still share; cross-scope ones do not need to,
  // though conjunction on the same paths merges them here anyway.
  REQUIRE(at(fx.sig, n, "arg1") == at(fx.sig, n, "arg2"));

  auto d2 = fx.parse("arg1:X");
  auto d3 = fx.parse("arg2:X");
  Node* m = desc_to_fs(fx.sig, fx.heap,
                       Desc::conj(rename_vars(d2, "p#"), rename_vars(d3, "q#")));
  REQUIRE(at(fx.sig, m, "arg1") != at(fx.sig, m, "arg2"));
}

TEST_CASE("description parser rejects malformed input") {
  Fix fx;
  REQUIRE_THROWS_AS(fx.parse(""), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("(hd:a"), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("hd:a)"), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("nosuchtype"), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("nosuchfeat:a"), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("[a,"), GrammarError);
  REQUIRE_THROWS_AS(fx.parse("hd:"), GrammarError);
}

TEST_CASE("grammar parsing: constraints, comments, multiple declarations") {
  Grammar g = parse_grammar(grammar_text("fig34.gram"));
  REQUIRE(g.constraints.size() == 2);
  REQUIRE(g.constraints[0].antecedent == g.sig.type_id("a"));
  REQUIRE(g.constraints[1].antecedent == g.sig.type_id("b"));

  // The consequent of a => (f:X, g:X) demands shared f and g values.
  Heap heap;
  Node* sat = desc_to_fs(g.sig, heap, parse_description(g.sig, "a, f:(X, a), g:X"));
  Node* unsat = desc_to_fs(g.sig, heap, parse_description(g.sig, "a, f:a, g:a"));
  REQUIRE(satisfies(g.sig, sat, g.constraints[0].consequent));
  REQUIRE_FALSE(satisfies(g.sig, unsat, g.constraints[0].consequent));
}

TEST_CASE("a type may carry several constraint declarations") {
  Grammar g = parse_grammar(
      "top sub [a].\n"
      "a sub [] intro [f:top, g:top].\n"
      "a => f:a.\n"
      "a => g:a.\n");
  REQUIRE(g.constraints.size() == 2);
  REQUIRE(g.constraints[0].antecedent == g.constraints[1].antecedent);
}

TEST_CASE("constraints may precede the declarations they mention") {
  Grammar g = parse_grammar(
      "a => f:b.\n"
      "top sub [a, b].\n"
      "a sub [] intro [f:top].\n"
      "b sub [].\n");
  REQUIRE(g.constraints.size() == 1);
  Heap heap;
  Node* n = desc_to_fs(g.sig, heap, g.constraints[0].consequent);
  REQUIRE(print_avm(g.sig, n) == "[a f:b]");
}

TEST_CASE("grammar parser errors") {
  REQUIRE_THROWS_AS(parse_grammar("top sub [a]"), GrammarError);        // missing '.'
  REQUIRE_THROWS_AS(parse_grammar("top sub [a].\na => f:b\n"), GrammarError);
  REQUIRE_THROWS_AS(parse_grammar("top sub [a].\nq => top.\n"), GrammarError);
  REQUIRE_THROWS_AS(parse_grammar("top sub [a].\norder_types [nosuch].\n"), GrammarError);
}
