#include <sstream>

#include <gtest/gtest.h>

#include "litelong/error.hpp"
#include "litelong/taxonomy.hpp"
#include "test_support.hpp"

using namespace litelong;

namespace {

Taxonomy parse(const std::string& csv) {
  std::istringstream in(csv);
  return parse_taxonomy(in, "t.csv");
}

std::string error_of(const std::string& csv) {
  try {
    parse(csv);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Taxonomy, RootAndChild) {
  const Taxonomy t = parse("code,label,parent_code\nFIC000000,Fiction,\nFIC022000,Mystery,FIC000000\n");
  EXPECT_EQ(t.subcategories(), std::vector<std::string>{"FIC022000"});
  EXPECT_EQ(t.node("FIC000000").depth, 0);
  EXPECT_FALSE(t.node("FIC000000").parent_code.has_value());
  EXPECT_EQ(t.node("FIC022000").depth, 1);
  EXPECT_EQ(t.path_label("FIC022000"), "Fiction > Mystery");
}

TEST(Taxonomy, BisacShapedFixtureHas4500Subcategories) {
  const Taxonomy t = load_taxonomy(testsupport::source_dir() / "data" / "taxonomy" / "bisac_synthetic.csv");
  EXPECT_EQ(subcategory_count(t), 4500u);
  std::size_t roots = 0;
  for (const auto& [code, node] : t.nodes()) roots += node.depth == 0;
  EXPECT_EQ(roots, 51u);
}

TEST(Taxonomy, SelfParentIsCycle) {
  const std::string msg = error_of("code,label,parent_code\nA,Alpha,A\n");
  EXPECT_NE(msg.find("cycle"), std::string::npos) << msg;
  EXPECT_NE(msg.find("A"), std::string::npos) << msg;
}

TEST(Taxonomy, LongerCycleNamesACodeOnIt) {
  const std::string msg = error_of("code,label,parent_code\nR,Root,\nA,Alpha,C\nB,Beta,A\nC,Gamma,B\n");
  EXPECT_NE(msg.find("cycle"), std::string::npos) << msg;
  EXPECT_TRUE(msg.find('A') != std::string::npos || msg.find('B') != std::string::npos ||
              msg.find('C') != std::string::npos);
}

TEST(Taxonomy, DanglingParentNamesRow) {
  const std::string msg = error_of("code,label,parent_code\nR,Root,\nA,Alpha,R\nB,Beta,MISSING\n");
  EXPECT_NE(msg.find("MISSING"), std::string::npos) << msg;
  EXPECT_NE(msg.find("t.csv:4"), std::string::npos) << msg;
}

TEST(Taxonomy, DuplicateCodeIsError) {
  const std::string msg = error_of("code,label,parent_code\nR,Root,\nR,Again,\n");
  EXPECT_NE(msg.find("R"), std::string::npos);
  EXPECT_NE(msg.find("t.csv:3"), std::string::npos) << msg;
}

TEST(Taxonomy, HeaderIsRequired) {
  EXPECT_THROW(parse("id,name,parent\nR,Root,\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Taxonomy, EmptyTaxonomyHasNoSubcategories) {
  const Taxonomy t = parse("code,label,parent_code\n");
  EXPECT_EQ(subcategory_count(t), 0u);
  EXPECT_EQ(subcategory_count(Taxonomy{}), 0u);
}

TEST(Taxonomy, ThreeLevelChainHasOneSubcategory) {
  const Taxonomy t = parse("code,label,parent_code\nL,Leaf,M\nM,Mid,R\nR,Root,\n");
  EXPECT_EQ(subcategory_count(t), 1u);
  EXPECT_EQ(t.node("L").depth, 2);
  EXPECT_EQ(t.path_label("L"), "Root > Mid > Leaf");
  EXPECT_TRUE(t.is_leaf("L"));
  EXPECT_FALSE(t.is_leaf("M"));
}

TEST(Taxonomy, QuotedFieldsAndBom) {
  const Taxonomy t = parse(
      "\xEF\xBB\xBF" "code,label,parent_code\r\nR,\"Body, Mind \"\"and\"\" Spirit\",\r\nC,\"Multi\nline\",R\r\n");
  EXPECT_EQ(t.node("R").label, "Body, Mind \"and\" Spirit");
  EXPECT_EQ(t.node("C").label, "Multi\nline");
}

TEST(Taxonomy, LeavesAreLexicographicAndReloadIsByteIdentical) {
  const std::string csv = "code,label,parent_code\nZ,Zed,\nZ3,z3,Z\nA,Ay,\nZ1,z1,Z\nA2,a2,A\nA1,a1,A\n";
  const Taxonomy a = parse(csv);
  const Taxonomy b = parse(csv);
  EXPECT_EQ(a.subcategories(), (std::vector<std::string>{"A1", "A2", "Z1", "Z3"}));
  EXPECT_EQ(a.serialize(), b.serialize());
}

TEST(Taxonomy, EveryNodeReachesExactlyOneRootAndDepthsAreConsistent) {
  const Taxonomy t = load_taxonomy(testsupport::fixture("taxonomy_500.csv"));
  EXPECT_EQ(subcategory_count(t), 500u);
  for (const auto& [code, node] : t.nodes()) {
    int hops = 0;
    const CategoryNode* cur = &node;
    while (cur->parent_code) {
      const CategoryNode& parent = t.node(*cur->parent_code);
      EXPECT_EQ(cur->depth, parent.depth + 1);
      cur = &parent;
      ASSERT_LT(++hops, 100);
    }
    EXPECT_EQ(cur->depth, 0);
    EXPECT_EQ(hops, node.depth);
  }
}

TEST(Taxonomy, UnknownCodeIsNotFound) {
  const Taxonomy t = parse("code,label,parent_code\nR,Root,\n");
  EXPECT_THROW(t.node("nope"), NotFoundError);
  EXPECT_FALSE(t.contains("nope"));
}
