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

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "deplima/conllu.h"
#include "deplima/embeddings.h"
#include "deplima/eval.h"
#include "deplima/lemmatizer.h"
#include "deplima/log.h"
#include "deplima/ner.h"
#include "deplima/pipeline.h"
#include "deplima/segmenter.h"
#include "deplima/tagger_parser.h"
#include "deplima/training.h"
#include "deplima/units.h"

namespace deplima::cli {

namespace {

namespace fs = std::filesystem;

// Bad invocation that the parser cannot see (exit 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or unwritable file (exit 2).
class IoError : public Error {
 public:
  using Error::Error;
};

std::string ReadInput(const std::string &path) {
  std::stringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  ss << in.rdbuf();
  return ss.str();
}

void WriteOutput(const std::string &path, const std::string &data, std::ostream &out) {
  if (path == "-") {
    out << data;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << data)) throw IoError("cannot write " + path);
}

bool IsConlluPath(const std::string &path) {
  const std::string ext = fs::path(path).extension().string();
  return ext == ".conllu" || ext == ".conll";
}

Hyper ParseHyper(const std::vector<std::string> &settings) {
  std::map<std::string, std::string> values;
  for (const auto &s : settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError("--set expects key=value, got '" + s + "'");
    values[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return Hyper(std::move(values));
}

std::shared_ptr<const WordVectors> LoadVectors(const std::string &path, std::size_t buckets) {
  if (path.empty()) return nullptr;
  if (fs::path(path).extension() == ".dlq8")
    return std::make_shared<QuantizedTable>(QuantizedTable::Load(path));
  return std::make_shared<SubwordTable>(SubwordTable::FromText(ReadInput(path), buckets));
}

std::vector<NerSentence> ReadNerCorpus(const std::string &path) {
  const std::string text = ReadInput(path);
  return IsConlluPath(path) ? NerCorpusFromConllu(ParseConllu(text)) : ParseBioCorpus(text);
}

// Saves the model and its "epoch loss dev" log (to --log, else <model>.log).
template <typename Model>
void SaveTrained(const Model &model, const TrainingLog &log, const std::string &model_path,
                 const std::string &log_path) {
  model.Save(model_path);
  const std::string text = FormatTrainingLog(log);
  WriteOutput(log_path.empty() ? model_path + ".log" : log_path, text, std::cerr);
  if (!log.empty()) {
    DEPLIMA_LOG(kInfo) << "trained " << log.size() << " epochs, final loss " << log.back().loss
                       << "; model written to " << model_path;
  }
}

struct CommonTrain {
  std::string train;
  std::string dev;
  std::string output;
  std::string log;
  std::uint64_t seed = 1;
  std::vector<std::string> set;
};

void AddTrainFlags(CLI::App *sub, CommonTrain &t, bool dev) {
  sub->add_option("--train", t.train, "Training corpus")->required();
  if (dev) sub->add_option("--dev", t.dev, "Held-out CoNLL-U for the per-epoch dev metric");
  sub->add_option("--output", t.output, "Model file to write")->required();
  sub->add_option("--log", t.log, "Training log file (default: <output>.log)");
  sub->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  sub->add_option("--set", t.set, "Hyperparameter key=value (repeatable)");
}

struct AnalyzeArgs {
  std::string pipeline;
  std::string config;
  std::string lang;
  std::string model_dir = "models";
  std::vector<std::string> inputs{"-"};
  std::string output = "-";
  std::size_t jobs = 1;
};

int RunAnalyze(const AnalyzeArgs &a, std::ostream &out) {
  if (a.pipeline.empty() == a.config.empty())
    throw UsageError("exactly one of --pipeline and --config is required");
  PipelineConfig config;
  if (!a.config.empty()) {
    config = ParseConfig(ReadInput(a.config));
    if (!a.lang.empty()) config.language = a.lang;
  } else {
    if (a.lang.empty()) throw UsageError("--lang is required with --pipeline");
    const auto &names = BuiltinPipelineNames();
    if (std::find(names.begin(), names.end(), a.pipeline) == names.end()) {
      std::string known;
      for (const auto &n : names) known += " " + n;
      throw UsageError("unknown pipeline '" + a.pipeline + "'; known:" + known);
    }
    config = BuiltinPipeline(a.pipeline, a.lang);
  }
  if (a.jobs == 0) throw UsageError("--jobs must be positive");
  const bool many = a.inputs.size() > 1;
  if (many && (a.output == "-" || !fs::is_directory(a.output)))
    throw UsageError("with several --input files, --output must be an existing directory");

  ResourceRegistry resources(a.model_dir);
  const Pipeline pipeline = BuildPipeline(config, BuiltinUnits(), resources);
  const std::string layer = InputLayerOf(config);

  std::vector<std::string> results(a.inputs.size());
  std::vector<std::string> errors(a.inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < a.inputs.size();) {
      try {
        AnalysisData data;
        data.Set(layer, ReadInput(a.inputs[i]));
        results[i] = pipeline.Run(std::move(data)).Get<std::string>(kConlluOutputLayer);
      } catch (const std::exception &e) {
        errors[i] = a.inputs[i] + ": " + e.what();
      }
    }
  };
  const std::size_t threads = std::min(a.jobs, a.inputs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  for (const auto &e : errors) {
    if (!e.empty()) throw IoError(e);
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string path =
        many ? (fs::path(a.output) / fs::path(a.inputs[i]).stem()).string() + ".conllu"
             : a.output;
    WriteOutput(path, results[i], out);
  }
  return kExitOk;
}

struct QuantizeArgs {
  std::string input;
  std::string output;
  std::size_t subquantizers = 0;
  std::size_t codebook_size = 256;
  std::size_t buckets = 2000;
  std::size_t iterations = 25;
  std::uint64_t seed = 1;
};

int RunQuantize(const QuantizeArgs &a) {
  const SubwordTable table = SubwordTable::FromText(ReadInput(a.input), a.buckets);
  QuantizeOptions o;
  o.subquantizers = a.subquantizers;
  o.codebook_size = a.codebook_size;
  o.iterations = a.iterations;
  o.seed = a.seed;
  QuantizeReport report;
  const QuantizedTable q = QuantizedTable::Quantize(table, o, &report);
  q.Save(a.output);
  DEPLIMA_LOG(kInfo) << "quantized " << q.rows() << " rows: " << q.code_bytes()
                     << " code bytes vs " << q.float32_bytes() << " float32 bytes, mse "
                     << report.mean_squared_error;
  return kExitOk;
}

struct BootstrapArgs {
  std::string rules;
  std::string input;
  std::string output = "-";
  std::string corrected;
  std::string model;
  std::string embeddings;
  std::uint64_t seed = 1;
  std::vector<std::string> set;
};

// One round: rules (or a model trained on the corrected file) re-annotate
// the input tokens, written as BIO for manual correction.
int RunBootstrap(const BootstrapArgs &a, std::ostream &out) {
  if (a.corrected.empty() == a.rules.empty())
    throw UsageError("exactly one of --rules and --corrected is required");
  if (!a.corrected.empty() && a.model.empty())
    throw UsageError("--corrected requires --model");

  struct Sentence {
    std::vector<NerToken> tokens;
  };
  std::vector<Sentence> sentences;
  const std::string text = ReadInput(a.input);
  if (IsConlluPath(a.input)) {
    for (const auto &s : ParseConllu(text).sentences) {
      Sentence out_s;
      for (const auto *w : s.Words()) out_s.tokens.push_back({w->form, w->upos});
      sentences.push_back(std::move(out_s));
    }
  } else {
    for (const auto &s : ParseBioCorpus(text)) {
      Sentence out_s;
      for (const auto &t : s.tokens) out_s.tokens.push_back({t, ""});
      sentences.push_back(std::move(out_s));
    }
  }

  std::vector<NerSentence> result;
  if (!a.rules.empty()) {
    const RuleSet rules = LoadRules(a.rules);
    for (const auto &s : sentences) {
      NerSentence r;
      for (const auto &t : s.tokens) r.tokens.push_back(t.surface);
      r.tags = BioEncode(ApplyRules(rules, s.tokens), r.tokens.size());
      result.push_back(std::move(r));
    }
  } else {
    const Hyper hyper = ParseHyper(a.set);
    TrainingLog log;
    const NerModel model = TrainNer(ParseBioCorpus(ReadInput(a.corrected)),
                                    LoadVectors(a.embeddings, 2000), hyper, a.seed, &log);
    SaveTrained(model, log, a.model, "");
    for (const auto &s : sentences) {
      NerSentence r;
      for (const auto &t : s.tokens) r.tokens.push_back(t.surface);
      r.tags = r.tokens.empty() ? BioSequence{} : NeuralNerTags(model, r.tokens);
      result.push_back(std::move(r));
    }
  }
  WriteOutput(a.output, WriteBioCorpus(result), out);
  return kExitOk;
}

std::vector<std::vector<EntitySpan>> Spans(const std::vector<NerSentence> &corpus) {
  std::vector<std::vector<EntitySpan>> out;
  for (const auto &s : corpus) out.push_back(BioDecode(s.tags));
  return out;
}

CLI::App *Deepest(CLI::App &app) {
  CLI::App *cur = &app;
  for (;;) {
    const auto subs = cur->get_subcommands();
    if (subs.empty()) return cur;
    cur = subs.back();
  }
}

}  // namespace

int Dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Multilingual text analysis: segmentation, tagging, parsing, lemmatization, NER",
               "deplima"};
  app.require_subcommand(1, 1);
  std::string format = "table";

  AnalyzeArgs analyze;
  auto *an = app.add_subcommand("analyze", "Run an analysis pipeline over raw text or CoNLL-U");
  an->add_option("--pipeline", analyze.pipeline,
                 "Built-in pipeline: deepud, deepud-pretok, ner-rules, ner-rules-pretok, "
                 "ner-deep, ner-deep-pretok");
  an->add_option("--config", analyze.config, "Pipeline configuration file (instead of --pipeline)");
  an->add_option("--lang", analyze.lang, "Language code selecting <model-dir>/<lang>/");
  an->add_option("--model-dir", analyze.model_dir, "Model root directory")
      ->envname(kModelDirEnv)
      ->capture_default_str();
  an->add_option("--input", analyze.inputs,
                 "Input file(s); raw UTF-8 text, or CoNLL-U for -pretok pipelines ('-' = stdin)")
      ->capture_default_str();
  an->add_option("--output", analyze.output,
                 "Output CoNLL-U file ('-' = stdout), or a directory for several inputs")
      ->capture_default_str();
  an->add_option("--jobs", analyze.jobs, "Documents analyzed concurrently")
      ->capture_default_str();

  CommonTrain seg, parser, lemma, ner;
  std::string parser_embeddings, ner_embeddings;
  std::size_t parser_buckets = 2000, ner_buckets = 2000;
  auto *ts = app.add_subcommand("train-seg", "Train the character-level segmenter on CoNLL-U");
  AddTrainFlags(ts, seg, true);
  auto *tp = app.add_subcommand("train-parser", "Train the joint tagger and parser on CoNLL-U");
  AddTrainFlags(tp, parser, true);
  tp->add_option("--embeddings", parser_embeddings,
                 "Pretrained vectors: .dlq8 or word-vector text format");
  tp->add_option("--buckets", parser_buckets, "Subword buckets for text-format vectors")
      ->capture_default_str();
  auto *tl = app.add_subcommand("train-lemma", "Train the lemmatizer on CoNLL-U");
  AddTrainFlags(tl, lemma, false);
  auto *tn = app.add_subcommand("train-ner", "Train the neural NER tagger on BIO or CoNLL-U");
  AddTrainFlags(tn, ner, false);
  tn->add_option("--embeddings", ner_embeddings,
                 "Pretrained vectors: .dlq8 or word-vector text format");
  tn->add_option("--buckets", ner_buckets, "Subword buckets for text-format vectors")
      ->capture_default_str();

  std::string gold, pred;
  auto *eu = app.add_subcommand("eval-ud", "Score predicted CoNLL-U against gold");
  eu->add_option("--gold", gold, "Gold CoNLL-U")->required();
  eu->add_option("--pred", pred, "Predicted CoNLL-U")->required();
  eu->add_option("--format", format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}))
      ->capture_default_str();
  auto *en = app.add_subcommand("eval-ner", "Score predicted entity spans against gold");
  en->add_option("--gold", gold, "Gold BIO corpus or CoNLL-U with NE= in MISC")->required();
  en->add_option("--pred", pred, "Predicted BIO corpus or CoNLL-U")->required();
  en->add_option("--format", format, "table or kv")
      ->check(CLI::IsMember({"table", "kv"}))
      ->capture_default_str();

  QuantizeArgs quantize;
  auto *qz = app.add_subcommand("quantize", "Product-quantize a word-vector text file to .dlq8");
  qz->add_option("--input", quantize.input, "Word vectors in text format")->required();
  qz->add_option("--output", quantize.output, ".dlq8 file to write")->required();
  qz->add_option("-m,--subquantizers", quantize.subquantizers, "Subspaces (0 = dim/2)")
      ->capture_default_str();
  qz->add_option("-k,--codebook-size", quantize.codebook_size, "Centroids per subspace")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  qz->add_option("--buckets", quantize.buckets, "Subword n-gram buckets")->capture_default_str();
  qz->add_option("--iterations", quantize.iterations, "k-means iterations")
      ->capture_default_str();
  qz->add_option("--seed", quantize.seed, "Random seed")->capture_default_str();

  BootstrapArgs boot;
  auto *bs = app.add_subcommand(
      "bootstrap",
      "One NER bootstrap round: annotate with rules, or train on a corrected BIO file and "
      "re-annotate");
  bs->add_option("--input", boot.input, "Tokens to annotate: BIO corpus or CoNLL-U")->required();
  bs->add_option("--output", boot.output, "BIO file to write ('-' = stdout)")
      ->capture_default_str();
  bs->add_option("--rules", boot.rules, "Rule file (first round)");
  bs->add_option("--corrected", boot.corrected, "Manually corrected BIO corpus (later rounds)");
  bs->add_option("--model", boot.model, "Neural model file to write when training");
  bs->add_option("--embeddings", boot.embeddings, "Pretrained vectors for training");
  bs->add_option("--seed", boot.seed, "Random seed")->capture_default_str();
  bs->add_option("--set", boot.set, "Hyperparameter key=value (repeatable)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n\n" << Deepest(app)->help();
    return kExitUsage;
  }

  CLI::App *sub = Deepest(app);
  try {
    if (sub == an) return RunAnalyze(analyze, out);

    if (sub == ts) {
      const Hyper hyper = ParseHyper(seg.set);
      const ConlluDocument train = ParseConllu(ReadInput(seg.train));
      std::unique_ptr<ConlluDocument> dev;
      if (!seg.dev.empty()) dev = std::make_unique<ConlluDocument>(ParseConllu(ReadInput(seg.dev)));
      TrainingLog log;
      const SegmenterModel model = TrainSegmenter(train, hyper, seg.seed, dev.get(), &log);
      SaveTrained(model, log, seg.output, seg.log);
      return kExitOk;
    }
    if (sub == tp) {
      const Hyper hyper = ParseHyper(parser.set);
      const ConlluDocument train = ParseConllu(ReadInput(parser.train));
      std::unique_ptr<ConlluDocument> dev;
      if (!parser.dev.empty())
        dev = std::make_unique<ConlluDocument>(ParseConllu(ReadInput(parser.dev)));
      TrainingLog log;
      const TaggerParserModel model = TrainJoint(
          train, LoadVectors(parser_embeddings, parser_buckets), hyper, parser.seed, dev.get(),
          &log);
      SaveTrained(model, log, parser.output, parser.log);
      return kExitOk;
    }
    if (sub == tl) {
      const Hyper hyper = ParseHyper(lemma.set);
      const ConlluDocument train = ParseConllu(ReadInput(lemma.train));
      TrainingLog log;
      const LemmatizerModel model =
          TrainLemmatizer(LemmaTriples(train, true), hyper, lemma.seed, &log);
      SaveTrained(model, log, lemma.output, lemma.log);
      return kExitOk;
    }
    if (sub == tn) {
      const Hyper hyper = ParseHyper(ner.set);
      TrainingLog log;
      const NerModel model = TrainNer(ReadNerCorpus(ner.train),
                                      LoadVectors(ner_embeddings, ner_buckets), hyper, ner.seed,
                                      &log);
      SaveTrained(model, log, ner.output, ner.log);
      return kExitOk;
    }
    if (sub == eu) {
      const UdScores s =
          ScoreUd(ParseConllu(ReadInput(gold)), ParseConllu(ReadInput(pred)));
      out << (format == "kv" ? FormatUdKeyValues(s) : FormatUdTable(s));
      return kExitOk;
    }
    if (sub == en) {
      const auto g = ReadNerCorpus(gold);
      const auto p = ReadNerCorpus(pred);
      if (g.size() == p.size()) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          if (g[i].tokens.size() != p[i].tokens.size())
            throw EvalError(EvalErrc::kTokenCountMismatch,
                            "sentence " + std::to_string(i + 1) + ": token counts differ");
        }
      }
      const NerScores s = ScoreNer(Spans(g), Spans(p));
      out << (format == "kv" ? FormatNerKeyValues(s) : FormatNerTable(s));
      return kExitOk;
    }
    if (sub == qz) return RunQuantize(quantize);
    if (sub == bs) return RunBootstrap(boot, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const HyperError &e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace deplima::cli
