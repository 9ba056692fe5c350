#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pmcast/pattern.hpp"

using namespace pmcast;

namespace {

Alphabet abc() { return Alphabet({"a", "b", "c"}); }

}  // namespace

TEST(Alphabet, KeepsDeclarationOrder) {
  Alphabet a({"c", "a", "b"});
  EXPECT_EQ(a.size(), 3U);
  EXPECT_EQ(a.id("c"), 0);
  EXPECT_EQ(a.id("b"), 2);
  EXPECT_EQ(a.name(1), "a");
  EXPECT_FALSE(a.find("d").has_value());
  EXPECT_THROW(a.id("d"), UnknownSymbolError);
}

TEST(Alphabet, RejectsBadDeclarations) {
  EXPECT_THROW(Alphabet(std::vector<std::string>{}), ConfigError);
  EXPECT_THROW(Alphabet({"a", "a"}), ConfigError);
  EXPECT_THROW(Alphabet({"a", "1x"}), ConfigError);
  EXPECT_THROW(Alphabet({"a b"}), ConfigError);
  EXPECT_NO_THROW(Alphabet({"TurnNorth", "_x9"}));
}

TEST(Parse, SequenceOfSymbols) {
  auto ast = parse_pattern("a;c;c", abc());
  EXPECT_TRUE(equal(ast, ast::concat(ast::symbol("a"), ast::concat(ast::symbol("c"), ast::symbol("c")))));
}

TEST(Parse, EmptyTextIsEpsilon) {
  EXPECT_EQ(parse_pattern("", abc())->kind, NodeKind::Epsilon);
  EXPECT_EQ(parse_pattern("   ", abc())->kind, NodeKind::Epsilon);
}

TEST(Parse, StarOfUnionInsideSequence) {
  auto ast = parse_pattern("a;(a+b)*;c", abc());
  auto expected = ast::concat(ast::symbol("a"),
                              ast::concat(ast::star(ast::alt(ast::symbol("a"), ast::symbol("b"))), ast::symbol("c")));
  EXPECT_TRUE(equal(ast, expected));
}

TEST(Parse, Precedence) {
  EXPECT_TRUE(equal(parse_pattern("a;b+c", abc()),
                    ast::alt(ast::concat(ast::symbol("a"), ast::symbol("b")), ast::symbol("c"))));
  EXPECT_TRUE(equal(parse_pattern("a;b*", abc()), ast::concat(ast::symbol("a"), ast::star(ast::symbol("b")))));
  EXPECT_TRUE(equal(parse_pattern("a;(b+c)", abc()),
                    ast::concat(ast::symbol("a"), ast::alt(ast::symbol("b"), ast::symbol("c")))));
  EXPECT_TRUE(equal(parse_pattern("a**", abc()), ast::star(ast::star(ast::symbol("a")))));
}

TEST(Parse, WhitespaceIsIgnored) {
  EXPECT_TRUE(equal(parse_pattern(" a ;\t( a + b ) * ; c ", abc()), parse_pattern("a;(a+b)*;c", abc())));
}

TEST(Parse, MultiCharacterIdentifiers) {
  Alphabet a({"TurnNorth", "TurnSouth", "Stop_2"});
  auto ast = parse_pattern("TurnNorth;TurnSouth*;Stop_2", a);
  EXPECT_EQ(ast_symbols(ast), (std::set<std::string>{"TurnNorth", "TurnSouth", "Stop_2"}));
}

TEST(Parse, EmptyOperandsAreEpsilon) {
  EXPECT_TRUE(equal(parse_pattern("a+", abc()), ast::alt(ast::symbol("a"), ast::epsilon())));
  EXPECT_TRUE(equal(parse_pattern("()", abc()), ast::epsilon()));
}

TEST(Parse, SyntaxErrorsReportPosition) {
  try {
    parse_pattern("a;(b", abc());
    FAIL() << "expected SyntaxError";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.position(), 4U);
  }
  EXPECT_THROW(parse_pattern("a)", abc()), SyntaxError);
  EXPECT_THROW(parse_pattern("a;#", abc()), SyntaxError);
}

TEST(Parse, UnknownSymbol) {
  try {
    parse_pattern("a;d", abc());
    FAIL() << "expected UnknownSymbolError";
  } catch (const UnknownSymbolError& e) {
    EXPECT_EQ(e.symbol(), "d");
  }
}

TEST(AstSymbols, Examples) {
  EXPECT_EQ(ast_symbols(parse_pattern("a;c;c", abc())), (std::set<std::string>{"a", "c"}));
  EXPECT_TRUE(ast_symbols(ast::epsilon()).empty());
  EXPECT_EQ(ast_symbols(parse_pattern("(a+b)*", abc())), (std::set<std::string>{"a", "b"}));
}

TEST(Nullable, Basic) {
  EXPECT_TRUE(nullable(parse_pattern("", abc())));
  EXPECT_TRUE(nullable(parse_pattern("a*", abc())));
  EXPECT_TRUE(nullable(parse_pattern("a*;b*", abc())));
  EXPECT_FALSE(nullable(parse_pattern("a*;b", abc())));
  EXPECT_TRUE(nullable(parse_pattern("a+()", abc())));
}

TEST(ToString, Canonical) {
  EXPECT_EQ(to_string(parse_pattern("a ; (a+b)* ; c", abc())), "a;(a+b)*;c");
  EXPECT_EQ(to_string(parse_pattern("(a;b);c", abc())), "(a;b);c");
  EXPECT_EQ(to_string(parse_pattern("a;b;c", abc())), "a;b;c");
  EXPECT_EQ(to_string(parse_pattern("(a+b)+c", abc())), "(a+b)+c");
  EXPECT_EQ(to_string(parse_pattern("", abc())), "");
  EXPECT_EQ(to_string(parse_pattern("a;()", abc())), "a;()");
}

TEST(ToString, RoundTripOnRandomTrees) {
  std::mt19937_64 rng(7);
  Alphabet a = abc();
  for (int i = 0; i < 2000; ++i) {
    PatternAst ast = oracle::random_pattern(rng, a, 5);
    if (i % 7 == 0) ast = ast::concat(ast, ast::epsilon());
    PatternAst back = parse_pattern(to_string(ast), a);
    ASSERT_TRUE(equal(ast, back)) << to_string(ast);
  }
}
