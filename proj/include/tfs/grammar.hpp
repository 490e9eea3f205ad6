#ifndef TFS_GRAMMAR_HPP
#define TFS_GRAMMAR_HPP

#include <cctype>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tfs/description.hpp"
#include "tfs/signature.hpp"

namespace tfs {

/// One `t => D.` declaration. A type may have several declarations; they
/// are all asserted (conjoined), each keeping its own variable scope.
struct Constraint {
  TypeId antecedent;
  DescPtr consequent;  // desugared
};

struct Grammar {
  Signature sig;
  std::vector<Constraint> constraints;  // in declaration order
};

namespace detail {

struct Token {
  enum Kind { Ident, Punct, End } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) {}

  Token next() {
    skip_ws();
    if (pos_ >= src_.size()) return {Token::End, "", line_, col_};
    int line = line_, col = col_;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        id.push_back(advance());
      return {Token::Ident, id, line, col};
    }
    if (c == '=' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      advance(); advance();
      return {Token::Punct, "=>", line, col};
    }
    if (std::string(".,;:()[]|=").find(c) != std::string::npos) {
      advance();
      return {Token::Punct, std::string(1, c), line, col};
    }
    throw GrammarError(ErrorKind::SyntaxError,
                       std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') { ++line_; col_ = 1; } else { ++col_; }
    return c;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class GrammarParser {
 public:
  explicit GrammarParser(const std::string& src) : lex_(src) { cur_ = lex_.next(); }

  Grammar parse() {
    // Pass 1 over the token stream: collect statements. Signature
    // declarations are processed immediately; constraint bodies are kept
    // as token slices and parsed once the signature is complete.
    SignatureBuilder builder;
    struct PendingConstraint { std::string antecedent; int line, col; std::vector<Token> toks; };
    struct PendingOrderFeats { std::string type; std::vector<std::string> feats; int line, col; };
    std::vector<PendingConstraint> pending;
    std::vector<PendingOrderFeats> feat_orders;
    std::vector<std::pair<std::vector<std::string>, int>> type_orders;

    while (cur_.kind != Token::End) {
      Token head = expect_ident();
      if (head.text == "order_types") {
        type_orders.emplace_back(parse_name_list(), head.line);
        expect_punct(".");
        continue;
      }
      if (head.text == "order_feats") {
        PendingOrderFeats of;
        of.type = expect_ident().text;
        of.feats = parse_name_list();
        of.line = head.line; of.col = head.col;
        expect_punct(".");
        feat_orders.push_back(std::move(of));
        continue;
      }
      if (head.text == "type" && cur_.kind == Token::Ident && cur_.text != "sub") {
        head = expect_ident();  // optional leading 'type' keyword
      }
      if (cur_.kind == Token::Ident && cur_.text == "sub") {
        parse_type_decl(builder, head);
        continue;
      }
      if (cur_.kind == Token::Punct && cur_.text == "=>") {
        next();
        PendingConstraint pc{head.text, head.line, head.col, {}};
        while (!(cur_.kind == Token::Punct && cur_.text == ".")) {
          if (cur_.kind == Token::End)
            throw GrammarError(ErrorKind::SyntaxError, "missing '.' after constraint",
                               head.line, head.col);
          pc.toks.push_back(cur_);
          next();
        }
        next();  // '.'
        pending.push_back(std::move(pc));
        continue;
      }
      throw GrammarError(ErrorKind::SyntaxError,
                         "expected 'sub' or '=>' after '" + head.text + "'",
                         cur_.line, cur_.col);
    }

    for (const auto& [names, line] : type_orders) {
      std::vector<TypeId> order;
      for (const auto& n : names) order.push_back(lookup_type(builder, n, line));
      builder.order_types(order);
    }
    for (const auto& of : feat_orders) {
      std::vector<FeatId> feats;
      for (const auto& n : of.feats) {
        if (!known_feats_.count(n))
          throw GrammarError(ErrorKind::UnknownFeature, n, of.line, of.col);
        feats.push_back(builder.intern_feat(n));
      }
      builder.order_feats(lookup_type(builder, of.type, of.line), feats);
    }

    Grammar g;
    g.sig = builder.finish();
    for (const auto& pc : pending) {
      auto ant = g.sig.find_type(pc.antecedent);
      if (!ant)
        throw GrammarError(ErrorKind::UnknownType, pc.antecedent, pc.line, pc.col);
      DescParser dp{g.sig, pc.toks};
      DescPtr d = dp.parse_full();
      g.constraints.push_back({*ant, desugar(g.sig, d)});
    }
    return g;
  }

  /// Parse a standalone description (query syntax).
  static DescPtr parse_description(const Signature& sig, const std::string& src) {
    Lexer lex(src);
    std::vector<Token> toks;
    for (Token t = lex.next(); t.kind != Token::End; t = lex.next()) {
      if (t.kind == Token::Punct && t.text == ".") break;
      toks.push_back(t);
    }
    DescParser dp{sig, toks};
    return desugar(sig, dp.parse_full());
  }

 private:
  // --- top-level token helpers ---
  void next() { cur_ = lex_.next(); }

  Token expect_ident() {
    if (cur_.kind != Token::Ident)
      throw GrammarError(ErrorKind::SyntaxError, "expected identifier", cur_.line, cur_.col);
    Token t = cur_;
    next();
    return t;
  }

  void expect_punct(const std::string& p) {
    if (cur_.kind != Token::Punct || cur_.text != p)
      throw GrammarError(ErrorKind::SyntaxError, "expected '" + p + "'", cur_.line, cur_.col);
    next();
  }

  std::vector<std::string> parse_name_list() {
    expect_punct("[");
    std::vector<std::string> names;
    if (!(cur_.kind == Token::Punct && cur_.text == "]")) {
      names.push_back(expect_ident().text);
      while (cur_.kind == Token::Punct && cur_.text == ",") {
        next();
        names.push_back(expect_ident().text);
      }
    }
    expect_punct("]");
    return names;
  }

  void parse_type_decl(SignatureBuilder& builder, const Token& name) {
    next();  // 'sub'
    TypeId t = builder.intern_type(name.text);
    mentioned_types_.insert(name.text);
    std::vector<TypeId> subs;
    for (const auto& n : parse_name_list()) {
      subs.push_back(builder.intern_type(n));
      mentioned_types_.insert(n);
    }
    std::vector<std::pair<FeatId, TypeId>> intro;
    if (cur_.kind == Token::Ident && cur_.text == "intro") {
      next();
      expect_punct("[");
      if (!(cur_.kind == Token::Punct && cur_.text == "]")) {
        for (;;) {
          Token f = expect_ident();
          expect_punct(":");
          Token v = expect_ident();
          known_feats_.insert(f.text);
          intro.emplace_back(builder.intern_feat(f.text), builder.intern_type(v.text));
          mentioned_types_.insert(v.text);
          if (cur_.kind == Token::Punct && cur_.text == ",") { next(); continue; }
          break;
        }
      }
      expect_punct("]");
    }
    builder.declare(t, subs, intro, name.line);
    expect_punct(".");
  }

  TypeId lookup_type(SignatureBuilder& builder, const std::string& name, int line) {
    if (!mentioned_types_.count(name))
      throw GrammarError(ErrorKind::UnknownType, name, line, 1);
    return builder.intern_type(name);
  }

  // --- description sub-parser over a token slice ---
  struct DescParser {
    const Signature& sig;
    const std::vector<Token>& toks;
    std::size_t pos = 0;

    const Token& cur() const {
      static Token end{Token::End, "", 0, 0};
      return pos < toks.size() ? toks[pos] : end;
    }
    bool at_punct(const char* p) const {
      return cur().kind == Token::Punct && cur().text == p;
    }
    void advance() { ++pos; }

    [[noreturn]] void fail(const std::string& msg) const {
      throw GrammarError(ErrorKind::SyntaxError, msg, cur().line, cur().col);
    }

    DescPtr parse_full() {
      if (toks.empty()) fail("empty description");
      DescPtr d = parse_disj();
      if (pos != toks.size()) fail("trailing tokens in description");
      return d;
    }

    DescPtr parse_disj() {
      DescPtr d = parse_conj();
      while (at_punct(";")) {
        advance();
        d = Desc::disj(d, parse_conj());
      }
      return d;
    }

    DescPtr parse_conj() {
      DescPtr d = parse_primary();
      while (at_punct(",")) {
        advance();
        d = Desc::conj(d, parse_primary());
      }
      return d;
    }

    DescPtr parse_primary() {
      const Token t = cur();
      if (at_punct("(")) {
        advance();
        DescPtr d = parse_disj();
        if (!at_punct(")")) fail("expected ')'");
        advance();
        return d;
      }
      if (at_punct("[")) return parse_list();
      if (t.kind != Token::Ident) fail("expected identifier");
      advance();
      bool is_var = std::isupper(static_cast<unsigned char>(t.text[0])) || t.text[0] == '_';
      if (is_var) {
        if (at_punct("=")) {
          advance();
          return Desc::conj(Desc::variable(t.text, t.line, t.col), parse_primary());
        }
        return Desc::variable(t.text, t.line, t.col);
      }
      if (at_punct(":")) {
        advance();
        auto f = sig.find_feat(t.text);
        if (!f) throw GrammarError(ErrorKind::UnknownFeature, t.text, t.line, t.col);
        return Desc::feat_val(*f, parse_primary(), t.line, t.col);
      }
      auto ty = sig.find_type(t.text);
      if (!ty) throw GrammarError(ErrorKind::UnknownType, t.text, t.line, t.col);
      return Desc::type_lit(*ty, t.line, t.col);
    }

    DescPtr parse_list() {
      const Token open = cur();
      advance();  // '['
      std::vector<DescPtr> elems;
      DescPtr tail;
      if (!at_punct("]")) {
        elems.push_back(parse_primary());
        while (at_punct(",")) {
          advance();
          elems.push_back(parse_primary());
        }
        if (at_punct("|")) {
          advance();
          tail = parse_primary();
        }
      }
      if (!at_punct("]")) fail("expected ']'");
      advance();
      return Desc::list(std::move(elems), std::move(tail), open.line, open.col);
    }
  };

  Lexer lex_;
  Token cur_;
  std::set<std::string> mentioned_types_;
  std::set<std::string> known_feats_;
};

}  // namespace detail

inline Grammar parse_grammar(const std::string& source) {
  detail::GrammarParser p(source);
  return p.parse();
}

inline Signature load_signature(const std::string& source) {
  return parse_grammar(source).sig;
}

inline DescPtr parse_description(const Signature& sig, const std::string& source) {
  return detail::GrammarParser::parse_description(sig, source);
}

}  // namespace tfs

#endif  // TFS_GRAMMAR_HPP
