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

#include "deplima/units.h"

#include <memory>
#include <utility>

#include "deplima/conllu.h"
#include "deplima/embeddings.h"
#include "deplima/lemmatizer.h"
#include "deplima/ner.h"
#include "deplima/segmenter.h"
#include "deplima/tagger_parser.h"
#include "deplima/utf8.h"

namespace deplima {

namespace {

template <typename T>
using Loader = std::function<std::shared_ptr<const T>()>;

std::shared_ptr<const WordVectors> LoadEmbeddings(const UnitSetup &setup) {
  return setup.resources.Get<QuantizedTable>(
      setup.language, "embeddings", Loader<QuantizedTable>([&] {
        return std::make_shared<const QuantizedTable>(QuantizedTable::Load(
            setup.resources.Resolve(setup.language, "embeddings", kEmbeddingsFile)));
      }));
}

// Base for the units that edit the token graph in place.
class GraphEditor : public ProcessingUnit {
 public:
  std::vector<std::string> inputs() const override { return {kTokenGraphLayer}; }
  std::vector<std::string> outputs() const override { return {kTokenGraphLayer}; }
  void Process(UnitContext &context) const override {
    Edit(context.Edit<AnalysisGraph>(kTokenGraphLayer));
  }

 protected:
  virtual void Edit(AnalysisGraph &graph) const = 0;
};

class UdTokenizer : public ProcessingUnit {
 public:
  explicit UdTokenizer(const UnitSetup &setup) {
    model_ = setup.resources.Get<SegmenterModel>(
        setup.language, "segmenter", Loader<SegmenterModel>([&] {
          return std::make_shared<const SegmenterModel>(SegmenterModel::Load(
              setup.resources.Resolve(setup.language, "segmenter", kSegmenterFile)));
        }));
  }
  std::string name() const override { return "ud-tokenizer"; }
  std::vector<std::string> inputs() const override { return {kRawTextLayer}; }
  std::vector<std::string> outputs() const override { return {kTokenGraphLayer}; }

  void Process(UnitContext &context) const override {
    const std::string &text = context.Read<std::string>(kRawTextLayer);
    const std::u32string cps = utf8::Decode(text);
    bool blank = true;
    for (char32_t c : cps) blank = blank && utf8::IsSpace(c);
    if (blank) {
      context.Write(kTokenGraphLayer, AnalysisGraph());
      return;
    }
    const Segmentation seg = Segment(*model_, text);
    AnalysisGraph g = AnalysisGraph::Linear(seg.tokens);
    const std::vector<NodeId> path = g.FirstPath();
    std::size_t sentence = 0, first = 0, b = 0;
    for (std::size_t i = 0; i < seg.tokens.size(); ++i) {
      TokenNode &n = g.node(path[i]);
      n.annotations[kSentenceKey] = std::to_string(sentence);
      const bool last = b < seg.sentence_breaks.size() && seg.sentence_breaks[b] == i;
      if (!last && i + 1 < seg.tokens.size() &&
          seg.tokens[i + 1].char_start == seg.tokens[i].char_end) {
        n.annotations["misc"] = "SpaceAfter=No";
      }
      if (last || i + 1 == seg.tokens.size()) {
        const std::size_t start = seg.tokens[first].char_start;
        g.node(path[first]).annotations["sent:text"] =
            utf8::Encode(std::u32string_view(cps).substr(start, seg.tokens[i].char_end - start));
        ++sentence;
        first = i + 1;
        if (last) ++b;
      }
    }
    context.Write(kTokenGraphLayer, std::move(g));
  }

 private:
  std::shared_ptr<const SegmenterModel> model_;
};

class ConlluReader : public ProcessingUnit {
 public:
  std::string name() const override { return "conllu-reader"; }
  std::vector<std::string> inputs() const override { return {kConlluInputLayer}; }
  std::vector<std::string> outputs() const override { return {kTokenGraphLayer}; }
  void Process(UnitContext &context) const override {
    const Layer &in = context.Read(kConlluInputLayer);
    if (const auto *doc = std::get_if<ConlluDocument>(&in)) {
      context.Write(kTokenGraphLayer, ConlluToGraph(*doc));
    } else {
      context.Write(kTokenGraphLayer,
                    ConlluToGraph(ParseConllu(context.Read<std::string>(kConlluInputLayer))));
    }
  }
};

std::vector<std::string> Surfaces(const AnalysisGraph &g, const std::vector<NodeId> &ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (NodeId id : ids) out.push_back(g.node(id).surface);
  return out;
}

class TaggerParserUnit : public GraphEditor {
 public:
  explicit TaggerParserUnit(const UnitSetup &setup) {
    model_ = setup.resources.Get<TaggerParserModel>(
        setup.language, "parser", Loader<TaggerParserModel>([&] {
          auto m = std::make_shared<TaggerParserModel>(TaggerParserModel::Load(
              setup.resources.Resolve(setup.language, "parser", kParserFile)));
          if (m->words.uses_pretrained) m->AttachEmbeddings(LoadEmbeddings(setup));
          return std::shared_ptr<const TaggerParserModel>(std::move(m));
        }));
  }
  std::string name() const override { return "tagger-parser"; }

 protected:
  void Edit(AnalysisGraph &g) const override {
    g.ClearDependencies();
    for (const auto &ids : SentencesOf(g)) {
      const SentenceAnalysis a = AnalyzeSentence(*model_, Surfaces(g, ids));
      for (std::size_t i = 0; i < ids.size(); ++i) {
        Annotations &n = g.node(ids[i]).annotations;
        n["upos"] = a.upos[i];
        const std::string feats = FormatFeatures(a.feats[i]);
        if (feats.empty()) {
          n.erase("feats");
        } else {
          n["feats"] = feats;
        }
        n.erase("deprel");
        const NodeId head = a.heads[i] == 0 ? AnalysisGraph::kStart : ids[a.heads[i] - 1];
        g.AddDependency(head, ids[i], a.deprels[i]);
      }
    }
  }

 private:
  std::shared_ptr<const TaggerParserModel> model_;
};

class LemmatizerUnit : public GraphEditor {
 public:
  explicit LemmatizerUnit(const UnitSetup &setup) {
    model_ = setup.resources.Get<LemmatizerModel>(
        setup.language, "lemmatizer", Loader<LemmatizerModel>([&] {
          return std::make_shared<const LemmatizerModel>(LemmatizerModel::Load(
              setup.resources.Resolve(setup.language, "lemmatizer", kLemmatizerFile)));
        }));
  }
  std::string name() const override { return "lemmatizer"; }

 protected:
  void Edit(AnalysisGraph &g) const override {
    for (const auto &ids : SentencesOf(g)) {
      for (NodeId id : ids) {
        TokenNode &n = g.node(id);
        const LemmaKey key{n.surface, n.annotation("upos"), n.annotation("feats")};
        std::string lemma = Lemmatize(*model_, key);
        n.annotations["lemma"] = lemma.empty() ? n.surface : std::move(lemma);
      }
    }
  }

 private:
  std::shared_ptr<const LemmatizerModel> model_;
};

void Annotate(AnalysisGraph &g, const std::vector<NodeId> &ids,
              const std::vector<EntitySpan> &spans) {
  for (NodeId id : ids) g.node(id).annotations.erase(kNeAnnotation);
  const BioSequence tags = BioEncode(spans, ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (tags[i] != "O") g.node(ids[i]).annotations[kNeAnnotation] = tags[i];
  }
}

class NerRulesUnit : public GraphEditor {
 public:
  explicit NerRulesUnit(const UnitSetup &setup) {
    rules_ = setup.resources.Get<RuleSet>(setup.language, "ner-rules", Loader<RuleSet>([&] {
      return std::make_shared<const RuleSet>(
          LoadRules(setup.resources.Resolve(setup.language, "ner-rules", kNerRulesFile)));
    }));
  }
  std::string name() const override { return "ner-rules"; }

 protected:
  void Edit(AnalysisGraph &g) const override {
    for (const auto &ids : SentencesOf(g)) {
      std::vector<NerToken> tokens;
      tokens.reserve(ids.size());
      for (NodeId id : ids) tokens.push_back({g.node(id).surface, g.node(id).annotation("upos")});
      Annotate(g, ids, ApplyRules(*rules_, tokens));
    }
  }

 private:
  std::shared_ptr<const RuleSet> rules_;
};

class NerDeepUnit : public GraphEditor {
 public:
  explicit NerDeepUnit(const UnitSetup &setup) {
    model_ = setup.resources.Get<NerModel>(setup.language, "ner", Loader<NerModel>([&] {
      auto m = std::make_shared<NerModel>(
          NerModel::Load(setup.resources.Resolve(setup.language, "ner", kNerModelFile)));
      if (m->words.uses_pretrained) m->AttachEmbeddings(LoadEmbeddings(setup));
      return std::shared_ptr<const NerModel>(std::move(m));
    }));
  }
  std::string name() const override { return "ner-deep"; }

 protected:
  void Edit(AnalysisGraph &g) const override {
    for (const auto &ids : SentencesOf(g)) Annotate(g, ids, NeuralNer(*model_, Surfaces(g, ids)));
  }

 private:
  std::shared_ptr<const NerModel> model_;
};

class ConlluWriter : public ProcessingUnit {
 public:
  std::string name() const override { return "conllu-writer"; }
  std::vector<std::string> inputs() const override { return {kTokenGraphLayer}; }
  std::vector<std::string> outputs() const override { return {kConlluOutputLayer}; }
  void Process(UnitContext &context) const override {
    AnalysisGraph g = context.Read<AnalysisGraph>(kTokenGraphLayer);
    for (NodeId id : g.NodeIds()) {
      TokenNode &n = g.node(id);
      const std::string ne = n.annotation(kNeAnnotation);
      const std::string misc = n.annotation("misc");
      std::vector<std::string> items;
      if (!misc.empty() && misc != "_") {
        for (auto &item : utf8::Split(misc, '|')) {
          if (!item.starts_with("NE=")) items.push_back(std::move(item));
        }
      }
      if (!ne.empty()) items.push_back("NE=" + ne);
      std::string joined;
      for (const auto &item : items) joined += (joined.empty() ? "" : "|") + item;
      if (joined.empty()) {
        n.annotations.erase("misc");
      } else {
        n.annotations["misc"] = joined;
      }
    }
    const ConlluDocument doc = GraphToConllu(g);
    context.Write(kConlluOutputLayer,
                  doc.sentences.empty() ? std::string() : WriteConllu(doc));
  }
};

template <typename Unit>
UnitFactory WithSetup() {
  return [](const UnitSetup &setup) { return std::make_unique<Unit>(setup); };
}

template <typename Unit>
UnitFactory Plain() {
  return [](const UnitSetup &) { return std::make_unique<Unit>(); };
}

}  // namespace

void RegisterBuiltinUnits(UnitRegistry &registry) {
  registry.Register("ud-tokenizer", WithSetup<UdTokenizer>());
  registry.Register("conllu-reader", Plain<ConlluReader>());
  registry.Register("tagger-parser", WithSetup<TaggerParserUnit>());
  registry.Register("lemmatizer", WithSetup<LemmatizerUnit>());
  registry.Register("ner-rules", WithSetup<NerRulesUnit>());
  registry.Register("ner-deep", WithSetup<NerDeepUnit>());
  registry.Register("conllu-writer", Plain<ConlluWriter>());
}

UnitRegistry BuiltinUnits() {
  UnitRegistry r;
  RegisterBuiltinUnits(r);
  return r;
}

const std::vector<std::string> &BuiltinPipelineNames() {
  static const std::vector<std::string> kNames = {"deepud",    "deepud-pretok",
                                                  "ner-rules", "ner-rules-pretok",
                                                  "ner-deep",  "ner-deep-pretok"};
  return kNames;
}

std::string BuiltinPipelineText(const std::string &name, const std::string &lang) {
  const bool pretok = name.ends_with("-pretok");
  const std::string base = pretok ? name.substr(0, name.size() - 7) : name;
  std::string middle;
  if (base == "deepud") {
    middle = "step tagger-parser\nstep lemmatizer\n";
  } else if (base == "ner-rules") {
    middle = "step ner-rules\n";
  } else if (base == "ner-deep") {
    middle = "step ner-deep\n";
  } else {
    throw PipelineError(PipelineErrc::kBadConfig, 0, "no built-in pipeline '" + name + "'");
  }
  return "pipeline " + name + " lang=" + lang + "\n" +
         (pretok ? "step conllu-reader\n" : "step ud-tokenizer\n") + middle +
         "step conllu-writer\n";
}

PipelineConfig BuiltinPipeline(const std::string &name, const std::string &lang) {
  return ParseConfig(BuiltinPipelineText(name, lang));
}

std::string InputLayerOf(const PipelineConfig &config) {
  for (const auto &step : config.steps) {
    if (step.unit == "conllu-reader") return kConlluInputLayer;
    if (step.unit == "ud-tokenizer") return kRawTextLayer;
  }
  return config.name.ends_with("-pretok") ? kConlluInputLayer : kRawTextLayer;
}

}  // namespace deplima
