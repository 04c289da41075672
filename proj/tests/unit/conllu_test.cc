// Copyright 2026 The deplima Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "deplima/conllu.h"
#include "deplima/rng.h"
#include "support/random_conllu.h"

namespace deplima {
namespace {

constexpr char kHi[] = "# text = Hi\n1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n\n";

ConlluErrc KindOf(const std::string &text) {
  try {
    ParseConllu(text);
  } catch (const ConlluError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for: " << text;
  return ConlluErrc::kInvariantViolation;
}

TEST(ConlluTest, ParsesOneTokenSentence) {
  const ConlluDocument doc = ParseConllu(kHi);
  ASSERT_EQ(doc.sentences.size(), 1u);
  const auto &s = doc.sentences[0];
  ASSERT_EQ(s.tokens.size(), 1u);
  EXPECT_EQ(s.comments[0], "# text = Hi");
  EXPECT_EQ(s.Text(), "Hi");
  EXPECT_EQ(s.tokens[0].form, "Hi");
  EXPECT_EQ(s.tokens[0].lemma, "hi");
  EXPECT_EQ(s.tokens[0].upos, "INTJ");
  EXPECT_EQ(s.tokens[0].xpos, "");
  EXPECT_EQ(s.tokens[0].head, 0);
  EXPECT_EQ(s.tokens[0].deprel, "root");
}

TEST(ConlluTest, RoundTripIsByteIdentical) {
  EXPECT_EQ(WriteConllu(ParseConllu(kHi)), kHi);
}

TEST(ConlluTest, EmptyFeatsWrittenAsPlaceholder) {
  ConlluDocument doc = ParseConllu(kHi);
  doc.sentences[0].tokens[0].feats.clear();
  const std::string out = WriteConllu(doc);
  EXPECT_NE(out.find("\t_\t0\t"), std::string::npos);
  EXPECT_EQ(out.find("\t\t"), std::string::npos);
}

TEST(ConlluTest, FeatsSortedOnWrite) {
  ConlluDocument doc = ParseConllu(
      "1\tdogs\tdog\tNOUN\t_\tNumber=Plur|Case=Nom\t0\troot\t_\t_\n\n");
  const std::string out = WriteConllu(doc);
  EXPECT_NE(out.find("Case=Nom|Number=Plur"), std::string::npos);
}

TEST(ConlluTest, TwoSentencesSeparatedByOneBlankLine) {
  const std::string text =
      "1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\t_\t_\t0\troot\t_\t_\n\n";
  const ConlluDocument doc = ParseConllu(text);
  ASSERT_EQ(doc.sentences.size(), 2u);
  const std::string out = WriteConllu(doc);
  EXPECT_EQ(out, text);
  EXPECT_EQ(out.find("\n\n\n"), std::string::npos);
  EXPECT_EQ(out.substr(out.size() - 2), "\n\n");
}

TEST(ConlluTest, Errors) {
  EXPECT_EQ(KindOf("1\ta\ta\tX\t_\t_\t0\troot\t_\n\n"), ConlluErrc::kBadColumnCount);
  EXPECT_EQ(KindOf("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n3\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n\n"),
            ConlluErrc::kNonContiguousIds);
  EXPECT_EQ(KindOf("1\ta\ta\tX\t_\t_\t5\troot\t_\t_\n\n"), ConlluErrc::kBadHead);
  EXPECT_EQ(KindOf("1\ta\ta\tX\t_\t_\t1\troot\t_\t_\n\n"), ConlluErrc::kBadHead);
  EXPECT_EQ(KindOf("1\ta\ta\tX\t_\t_\tx\troot\t_\t_\n\n"), ConlluErrc::kBadHead);
  EXPECT_EQ(KindOf("1.1\ta\ta\tX\t_\t_\t_\t_\t_\t_\n\n"), ConlluErrc::kEmptyNode);
  EXPECT_EQ(KindOf("one\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n"), ConlluErrc::kBadId);
  EXPECT_EQ(KindOf(""), ConlluErrc::kEmptyDocument);
  EXPECT_EQ(KindOf("\n\n"), ConlluErrc::kEmptyDocument);
  EXPECT_EQ(KindOf("# only a comment\n\n"), ConlluErrc::kEmptySentence);
}

TEST(ConlluTest, ErrorLocations) {
  try {
    ParseConllu("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n1\tb\n");
    FAIL();
  } catch (const ConlluError &e) {
    EXPECT_EQ(e.location(), 3u);
  }
  try {
    ParseConllu("1\ta\ta\tX\t_\t_\t0\troot\t_\t_\n\n2\tb\tb\tX\t_\t_\t0\troot\t_\t_\n\n");
    FAIL();
  } catch (const ConlluError &e) {
    EXPECT_EQ(e.kind(), ConlluErrc::kNonContiguousIds);
    EXPECT_EQ(e.location(), 2u);
  }
}

TEST(ConlluTest, MultiwordRangesPreserved) {
  const std::string text =
      "# text = du chat\n"
      "1-2\tdu\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "1\tde\tde\tADP\t_\t_\t3\tcase\t_\t_\n"
      "2\tle\tle\tDET\t_\tDefinite=Def\t3\tdet\t_\t_\n"
      "3\tchat\tchat\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
  const ConlluDocument doc = ParseConllu(text);
  EXPECT_EQ(doc.sentences[0].Words().size(), 3u);
  EXPECT_EQ(WriteConllu(doc), text);
  EXPECT_EQ(WriteConllu(GraphToConllu(ConlluToGraph(doc))), text);
}

TEST(ConlluTest, WriterRejectsInvalidDocuments) {
  ConlluDocument doc = ParseConllu(kHi);
  doc.sentences[0].tokens[0].head = 1;
  EXPECT_THROW(WriteConllu(doc), ConlluError);
  doc = ParseConllu(kHi);
  doc.sentences[0].tokens[0].form = "a\tb";
  EXPECT_THROW(WriteConllu(doc), ConlluError);
  EXPECT_THROW(WriteConllu(ConlluDocument{}), ConlluError);
}

TEST(ConlluTest, RandomDocumentsRoundTrip) {
  Rng rng(2024);
  for (int i = 0; i < 300; ++i) {
    const ConlluDocument doc = testing::RandomConlluDocument(rng);
    const std::string text = WriteConllu(doc);
    const ConlluDocument back = ParseConllu(text);
    ASSERT_EQ(back, doc) << text;
    ASSERT_EQ(WriteConllu(back), text);
  }
}

TEST(ConlluTest, GraphConversionRoundTrip) {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const ConlluDocument doc = testing::RandomConlluDocument(rng);
    const AnalysisGraph g = ConlluToGraph(doc);
    g.Validate();
    EXPECT_EQ(g.token_count(), doc.WordCount());
    ASSERT_EQ(GraphToConllu(g), doc) << WriteConllu(doc);
  }
}

TEST(ConlluTest, OffsetsFollowTextComment) {
  const ConlluDocument doc = ParseConllu(
      "# text = Hi  there.\n"
      "1\tHi\thi\tINTJ\t_\t_\t0\troot\t_\t_\n"
      "2\tthere\tthere\tADV\t_\t_\t1\tadvmod\t_\t_\n"
      "3\t.\t.\tPUNCT\t_\t_\t1\tpunct\t_\t_\n\n");
  const AnalysisGraph g = ConlluToGraph(doc);
  const auto p = g.FirstPath();
  EXPECT_EQ(g.node(p[1]).char_start, 4u);
  EXPECT_EQ(g.node(p[2]).char_start, 9u);
  EXPECT_EQ(g.node(p[2]).char_end, 10u);
  EXPECT_EQ(g.HeadOf(p[0])->head, AnalysisGraph::kStart);
}

}  // namespace
}  // namespace deplima
