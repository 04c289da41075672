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

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "deplima/grad_check.h"
#include "deplima/ner.h"
#include "deplima/rng.h"
#include "support/toy_treebank.h"

namespace deplima {
namespace {

using nn::Var;

Hyper H(std::map<std::string, std::string> values) { return Hyper(std::move(values)); }

std::vector<NerToken> Tokens(const std::string &text, const std::string &upos = "") {
  std::vector<NerToken> out;
  std::istringstream in(text);
  std::istringstream tags(upos);
  for (std::string w; in >> w;) {
    std::string t;
    tags >> t;
    out.push_back({w, t});
  }
  return out;
}

RuleSet Rules(const std::string &text) {
  return ParseRules(text, [](const std::string &p) -> std::string {
    throw Error("no file " + p);
  });
}

template <typename F>
NerErrc KindOf(F &&f) {
  try {
    f();
  } catch (const NerError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no NerError";
  return NerErrc::kBadModel;
}

const EntityType kPer = EntityType::kPerson;
const EntityType kLoc = EntityType::kLocation;

TEST(NerTest, EntityTypeNames) {
  for (EntityType t : kRuleEntityTypes) EXPECT_EQ(ParseEntityType(EntityTypeName(t)), t);
  EXPECT_EQ(ParseEntityType("Loc"), kLoc);
  EXPECT_EQ(ParseEntityType("PER"), kPer);
  EXPECT_EQ(ParseEntityType("misc"), EntityType::kMiscellaneous);
  EXPECT_EQ(ParseEntityType("Date"), EntityType::kDateTime);
  EXPECT_FALSE(ParseEntityType("Animal"));
}

TEST(NerTest, BioEncodeExamples) {
  EXPECT_EQ(BioEncode({}, 3), (BioSequence{"O", "O", "O"}));
  const std::vector<EntitySpan> s = {{kPer, 0, 2}};
  EXPECT_EQ(BioEncode(s, 3), (BioSequence{"B-Person", "I-Person", "O"}));
  const std::vector<EntitySpan> overlap = {{kPer, 0, 2}, {kLoc, 1, 3}};
  EXPECT_EQ(KindOf([&] { BioEncode(overlap, 3); }), NerErrc::kOverlappingSpans);
  const std::vector<EntitySpan> outside = {{kPer, 2, 4}};
  EXPECT_EQ(KindOf([&] { BioEncode(outside, 3); }), NerErrc::kOutOfRange);
  const std::vector<EntitySpan> empty = {{kPer, 1, 1}};
  EXPECT_EQ(KindOf([&] { BioEncode(empty, 3); }), NerErrc::kOutOfRange);
}

TEST(NerTest, BioDecodeExamples) {
  EXPECT_EQ(BioDecode({"B-Loc", "I-Loc", "O"}), (std::vector<EntitySpan>{{kLoc, 0, 2}}));
  EXPECT_EQ(BioDecode({"I-Per"}), (std::vector<EntitySpan>{{kPer, 0, 1}}));
  EXPECT_EQ(BioDecode({"B-Person", "I-Location", "I-Location", "B-Person", "B-Person"}),
            (std::vector<EntitySpan>{{kPer, 0, 1}, {kLoc, 1, 3}, {kPer, 3, 4}, {kPer, 4, 5}}));
  EXPECT_EQ(BioDecode({"X-Person", "B-Animal", "O"}), (std::vector<EntitySpan>{}));
}

std::vector<EntitySpan> RandomSpans(Rng &rng, std::size_t n) {
  std::vector<EntitySpan> spans;
  std::size_t pos = 0;
  while (pos < n) {
    if (rng.Uniform() < 0.5) {
      ++pos;
      continue;
    }
    const std::size_t len = 1 + rng.Index(std::min<std::size_t>(4, n - pos));
    spans.push_back({kRuleEntityTypes[rng.Index(kRuleEntityTypes.size())], pos, pos + len});
    pos += len;
  }
  return spans;
}

TEST(NerTest, BioRoundTripProperty) {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = rng.Index(15);
    const std::vector<EntitySpan> spans = RandomSpans(rng, n);
    const BioSequence tags = BioEncode(spans, n);
    ASSERT_EQ(BioDecode(tags), spans);
    ASSERT_EQ(BioEncode(BioDecode(tags), n), tags);
  }
}

TEST(NerTest, GazetteerMatch) {
  const RuleSet r = Rules("term places Paris\nrule loc Location trigger=@places\n");
  EXPECT_EQ(ApplyRules(r, Tokens("I saw Paris")), (std::vector<EntitySpan>{{kLoc, 2, 3}}));
}

TEST(NerTest, EmptyRuleSet) {
  EXPECT_TRUE(ApplyRules(RuleSet{}, Tokens("I saw Paris")).empty());
  EXPECT_TRUE(ApplyRules(Rules("term p Paris\nrule a Location trigger=@p\n"), {}).empty());
}

TEST(NerTest, LongestMatchWins) {
  const RuleSet r = Rules(
      "rule short Location prio=9 trigger=York\n"
      "rule long Location prio=1 trigger=New York\n");
  EXPECT_EQ(ApplyRules(r, Tokens("to New York now")), (std::vector<EntitySpan>{{kLoc, 1, 3}}));
}

TEST(NerTest, TieBreaks) {
  // Same span: higher priority, then earlier rule.
  EXPECT_EQ(ApplyRules(Rules("rule a Person prio=1 trigger=Jo\nrule b Location prio=2 trigger=Jo\n"),
                       Tokens("Jo")),
            (std::vector<EntitySpan>{{kLoc, 0, 1}}));
  EXPECT_EQ(ApplyRules(Rules("rule a Person prio=2 trigger=Jo\nrule b Location prio=2 trigger=Jo\n"),
                       Tokens("Jo")),
            (std::vector<EntitySpan>{{kPer, 0, 1}}));
  // Equal length and priority, overlapping: leftmost wins.
  EXPECT_EQ(ApplyRules(Rules("rule a Person trigger=/[a-z]/ /[a-z]/\n"), Tokens("a b c")),
            (std::vector<EntitySpan>{{kPer, 0, 2}}));
}

TEST(NerTest, PatternElements) {
  const RuleSet r = Rules(
      "rule ci Organization trigger=~acme\n"
      "rule num Number trigger=/[0-9]+/+\n"
      "rule pos Person trigger=pos:PROPN pos:PROPN\n"
      "rule quote Product trigger=\\@home\n");
  const auto tokens = Tokens("ACME paid 10 20 30 to Ann Lee @home ok", "X V NUM NUM NUM P PROPN PROPN X X");
  EXPECT_EQ(ApplyRules(r, tokens),
            (std::vector<EntitySpan>{{EntityType::kOrganization, 0, 1},
                                     {EntityType::kNumber, 2, 5},
                                     {kPer, 6, 8},
                                     {EntityType::kProduct, 8, 9}}));
}

TEST(NerTest, Contexts) {
  const RuleSet r = Rules(
      "rule titled Person trigger=/[A-Z][a-z]+/ left=Dr.\n"
      "rule street Location trigger=/[A-Z][a-z]+/ right=~street\n");
  EXPECT_EQ(ApplyRules(r, Tokens("Dr. Who lives on Baker Street , not Elm")),
            (std::vector<EntitySpan>{{kPer, 1, 2}, {kLoc, 4, 5}}));
  EXPECT_TRUE(ApplyRules(r, Tokens("Who")).empty());
}

TEST(NerTest, MultiWordGazetteerPrefersLongestEntry) {
  const RuleSet r = Rules("term c New\nterm c New York\nterm c New York City\n"
                          "rule c Location trigger=@c\n");
  EXPECT_EQ(ApplyRules(r, Tokens("New York City and New York")),
            (std::vector<EntitySpan>{{kLoc, 0, 3}, {kLoc, 4, 6}}));
}

TEST(NerTest, RuleErrors) {
  EXPECT_EQ(KindOf([] { Rules("rule a Location trigger=@nowhere\n"); }),
            NerErrc::kBadRuleReference);
  EXPECT_EQ(KindOf([] { Rules("gazetteer g missing.txt\n"); }), NerErrc::kBadRuleReference);
  EXPECT_EQ(KindOf([] { Rules("rule a Animal trigger=x\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person prio=1\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person trigger=\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person prio=x trigger=a\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person trigger=a left=a b c d\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person trigger=a right=b+\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person trigger=/[/\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("rule a Person trigger=a\nrule a Person trigger=b\n"); }),
            NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { Rules("frobnicate\n"); }), NerErrc::kBadRule);
  EXPECT_EQ(KindOf([] { LoadRules("/nonexistent/rules.txt"); }), NerErrc::kBadRule);
}

TEST(NerTest, RuleOutputDisjointAndSorted) {
  const RuleSet r = Rules(
      "rule a Person prio=1 trigger=/[ab]/+\n"
      "rule b Location prio=2 trigger=b c\n"
      "rule c Event prio=3 trigger=/[abc]/ left=a\n"
      "rule d Number trigger=c+ right=a\n");
  Rng rng(3);
  const char *alphabet[] = {"a", "b", "c", "d"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const std::size_t n = rng.Index(12);
    for (std::size_t k = 0; k < n; ++k) text += std::string(alphabet[rng.Index(4)]) + " ";
    const auto spans = ApplyRules(r, Tokens(text));
    for (std::size_t k = 0; k < spans.size(); ++k) {
      ASSERT_LT(spans[k].start, spans[k].end);
      ASSERT_LE(spans[k].end, n);
      if (k > 0) ASSERT_LE(spans[k - 1].end, spans[k].start);
    }
    ASSERT_EQ(ApplyRules(r, Tokens(text)), spans);
  }
}

TEST(NerTest, DemoRulesReproduceFixture) {
  const std::string dir = DEPLIMA_SOURCE_DIR "/data/ner";
  const RuleSet rules = LoadRules(dir + "/demo.rules");
  std::ifstream in(dir + "/fixture.bio");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::vector<NerSentence> fixture = ParseBioCorpus(ss.str());
  ASSERT_EQ(fixture.size(), 20u);
  std::set<EntityType> seen;
  for (const auto &s : fixture) {
    std::vector<NerToken> tokens;
    for (const auto &t : s.tokens) tokens.push_back({t, ""});
    const std::vector<EntitySpan> got = ApplyRules(rules, tokens);
    EXPECT_EQ(BioEncode(got, tokens.size()), s.tags) << s.tokens[0] << " " << s.tokens[1];
    for (const auto &sp : got) seen.insert(sp.type);
  }
  EXPECT_EQ(seen.size(), kRuleEntityTypes.size());
}

TEST(NerTest, BioCorpusIo) {
  const std::string text = "Alice\tB-Person\nsaw\tO\n\n\nRome\tB-Location\n";
  const auto corpus = ParseBioCorpus(text);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].tokens, (std::vector<std::string>{"Alice", "saw"}));
  EXPECT_EQ(corpus[1].tags, (BioSequence{"B-Location"}));
  EXPECT_EQ(ParseBioCorpus(WriteBioCorpus(corpus))[1].tokens, corpus[1].tokens);
  EXPECT_EQ(WriteBioCorpus(corpus), "Alice\tB-Person\nsaw\tO\n\nRome\tB-Location\n\n");
  EXPECT_EQ(KindOf([] { ParseBioCorpus("Alice B-Person\n"); }), NerErrc::kBadCorpus);
  EXPECT_EQ(KindOf([] { ParseBioCorpus("Alice\tB-Animal\n"); }), NerErrc::kBadCorpus);
}

TEST(NerTest, CorpusFromConllu) {
  const auto doc = testing::MakeToyTreebank(20, 4);
  const auto corpus = NerCorpusFromConllu(doc);
  ASSERT_EQ(corpus.size(), 20u);
  std::size_t entities = 0;
  for (const auto &s : corpus) entities += BioDecode(s.tags).size();
  EXPECT_GT(entities, 0u);
}

TEST(NerTest, LabelIndex) {
  EXPECT_EQ(kNerLabelCount, 9u);
  for (std::size_t l = 0; l < kNerLabelCount; ++l) EXPECT_EQ(NerLabelIndex(NerLabelName(l)), l);
  EXPECT_EQ(NerLabelIndex("B-Number"), 0u);
  EXPECT_EQ(NerLabelIndex("I-Loc"), NerLabelIndex("I-Location"));
}

NerModel TinyNer(const std::vector<std::string> &frequent, std::size_t dim, std::uint64_t seed) {
  std::vector<std::string> collected;
  std::vector<char32_t> chars;
  CollectWordInventory(frequent, 1, &collected, &chars);
  Rng rng(seed);
  return MakeNerModel(MakeWordEncoder(collected, chars, {dim, dim, dim}, nullptr, rng), dim, rng);
}

TEST(NerTest, CraftedEmissions) {
  NerModel m = TinyNer({"I", "saw", "Paris"}, 2, 1);
  for (Var p : m.Parameters()) p.tensor().values.assign(p.size(), 0.0);
  EXPECT_TRUE(NeuralNer(m, {"I", "saw", "Paris"}).empty());

  const std::size_t paris = m.words.word_index.at("Paris");
  m.words.word_table.tensor().at(paris, 0) = 1.0;
  nn::GruParams &g = m.rnn.forward;
  g.b.tensor().values[0] = g.b.tensor().values[1] = 30.0;  // update gates open
  g.wx.tensor().at(4, 0) = 3.0;                            // candidate unit 0
  m.projection.tensor().at(0, NerLabelIndex("B-Location")) = 10.0;
  EXPECT_EQ(NeuralNerTags(m, {"I", "saw", "Paris"}), (BioSequence{"O", "O", "B-Location"}));
  EXPECT_EQ(NeuralNer(m, {"I", "saw", "Paris"}), (std::vector<EntitySpan>{{kLoc, 2, 3}}));
  EXPECT_EQ(KindOf([&] { NeuralNer(m, {}); }), NerErrc::kEmptySentence);
}

TEST(NerTest, LossGradient) {
  NerModel m = TinyNer({"Ann", "met", "Bo"}, 2, 2);
  Rng rng(8);
  for (double &v : m.words.word_table.tensor().values) v = rng.Normal();
  const std::vector<std::string> forms = {"Ann", "met", "Bo"};
  const std::vector<std::size_t> labels = {NerLabelIndex("B-Person"), 0,
                                           NerLabelIndex("B-Location")};
  const double err =
      nn::GradCheck([&] { return NerLoss(m, forms, labels); }, m.Parameters());
  EXPECT_LT(err, 1e-4);
}

double SpanF1(const NerModel &m, const std::vector<NerSentence> &corpus) {
  std::size_t tp = 0, gold = 0, pred = 0;
  for (const auto &s : corpus) {
    const auto g = BioDecode(s.tags);
    const auto p = NeuralNer(m, s.tokens);
    gold += g.size();
    pred += p.size();
    for (const auto &sp : p) tp += std::count(g.begin(), g.end(), sp);
  }
  return gold + pred == 0 ? 1.0 : 2.0 * tp / (gold + pred);
}

TEST(NerTest, OverfitsSmallCorpus) {
  std::vector<NerSentence> corpus;
  const char *verbs[] = {"met", "saw", "called", "thanked"};
  const char *others[] = {"Bob", "Carol", "him", "them", "everyone"};
  for (int i = 0; i < 40; ++i) {
    NerSentence s;
    s.tokens = {"Alice", verbs[i % 4], others[i % 5], "in", i % 2 ? "Rome" : "Oslo", "."};
    s.tags = {"B-Person", "O", i % 5 < 2 ? "B-Person" : "O", "O", "B-Location", "O"};
    corpus.push_back(s);
  }
  TrainingLog log;
  const NerModel m = TrainNer(corpus, nullptr, H({{"epochs", "10"}, {"hidden", "16"}}), 3, &log);
  EXPECT_EQ(log.size(), 10u);
  EXPECT_GE(SpanF1(m, corpus), 0.95);

  for (const auto &s : NeuralNer(m, {"Alice", "saw", "Bob"})) {
    EXPECT_NE(std::find(kNeuralEntityTypes.begin(), kNeuralEntityTypes.end(), s.type),
              kNeuralEntityTypes.end());
  }
  const NerModel back =
      NerModel::FromArchive(nn::ModelArchive::Deserialize(m.ToArchive().Serialize()));
  for (const auto &s : corpus) EXPECT_EQ(NeuralNerTags(back, s.tokens), NeuralNerTags(m, s.tokens));
}

TEST(NerTest, NonNeuralTypesBecomeOutside) {
  std::vector<NerSentence> corpus(5, NerSentence{{"On", "3", "May"}, {"O", "B-Number", "O"}});
  const NerModel m = TrainNer(corpus, nullptr, H({{"epochs", "5"}, {"hidden", "4"}}), 1);
  EXPECT_EQ(NeuralNerTags(m, {"On", "3", "May"}), (BioSequence{"O", "O", "O"}));
}

TEST(NerTest, TrainingErrors) {
  EXPECT_EQ(KindOf([] { TrainNer({}, nullptr, Hyper(), 1); }), NerErrc::kEmptyTrainingSet);
  EXPECT_EQ(KindOf([] { TrainNer({{{"a"}, {"O", "O"}}}, nullptr, Hyper(), 1); }),
            NerErrc::kBadCorpus);
  EXPECT_EQ(KindOf([] { NerModel::FromArchive(nn::ModelArchive()); }), NerErrc::kBadModel);
}

}  // namespace
}  // namespace deplima
