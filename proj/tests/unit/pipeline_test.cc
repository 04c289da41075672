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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "deplima/pipeline.h"

namespace deplima {
namespace {

// Appends its own name to the "probe" layer; optionally writes or reads a
// layer it did not declare, or throws.
class StubUnit : public ProcessingUnit {
 public:
  StubUnit(std::string name, std::vector<std::string> in, std::vector<std::string> out,
           std::atomic<int> *calls = nullptr)
      : name_(std::move(name)), in_(std::move(in)), out_(std::move(out)), calls_(calls) {}

  std::string name() const override { return name_; }
  std::vector<std::string> inputs() const override { return in_; }
  std::vector<std::string> outputs() const override { return out_; }
  void Process(UnitContext &ctx) const override {
    if (calls_) ++*calls_;
    if (name_ == "fail") throw std::runtime_error("boom");
    if (name_ == "rogue") ctx.Write("elsewhere", std::string("x"));
    if (name_ == "snoop") ctx.Read("raw-text");
    std::string probe;
    if (std::find(in_.begin(), in_.end(), "probe") != in_.end())
      probe = ctx.Read<std::string>("probe");
    for (const auto &o : out_) {
      if (o == "probe")
        ctx.Write(o, probe + name_ + ";");
      else
        ctx.Write(o, std::string(name_));
    }
  }

 private:
  std::string name_;
  std::vector<std::string> in_, out_;
  std::atomic<int> *calls_;
};

UnitRegistry StubRegistry(std::atomic<int> *calls = nullptr) {
  UnitRegistry r;
  auto add = [&](const std::string &name, std::vector<std::string> in,
                 std::vector<std::string> out) {
    r.Register(name, [=](const UnitSetup &) {
      return std::make_unique<StubUnit>(name, in, out, calls);
    });
  };
  add("tokenize", {"raw-text"}, {"token-graph", "probe"});
  add("tag", {"token-graph", "probe"}, {"token-graph", "probe"});
  add("fail", {"probe"}, {"probe"});
  add("rogue", {}, {"probe"});
  add("snoop", {}, {"probe"});
  add("count", {"probe"}, {"probe"});
  r.Register("needs-param", [](const UnitSetup &s) {
    s.Require("model");
    return std::make_unique<StubUnit>("needs-param", std::vector<std::string>{},
                                      std::vector<std::string>{"probe"});
  });
  r.Register("needs-resource", [](const UnitSetup &s) {
    s.resources.Resolve(s.language, "model", "model.bin");
    return std::make_unique<StubUnit>("needs-resource", std::vector<std::string>{},
                                      std::vector<std::string>{"probe"});
  });
  return r;
}

PipelineConfig Config(std::vector<std::string> units) {
  PipelineConfig c{"test", "toy", {}, {}};
  for (auto &u : units) c.steps.push_back({u, {}});
  return c;
}

PipelineErrc BuildError(const PipelineConfig &c, std::size_t *step = nullptr) {
  ResourceRegistry res;
  try {
    BuildPipeline(c, StubRegistry(), res);
  } catch (const PipelineError &e) {
    if (step) *step = e.step();
    return e.kind();
  }
  ADD_FAILURE() << "pipeline built";
  return PipelineErrc::kBadConfig;
}

TEST(PipelineTest, EmptyPipelineIsIdentity) {
  ResourceRegistry res;
  const Pipeline p = BuildPipeline(Config({}), StubRegistry(), res);
  AnalysisData in;
  in.Set("raw-text", std::string("abc"));
  EXPECT_EQ(p.Run(in), in);
}

TEST(PipelineTest, StepsRunInOrderAndLayersAccumulate) {
  ResourceRegistry res;
  const Pipeline p = BuildPipeline(Config({"tokenize", "tag", "tag"}), StubRegistry(), res);
  EXPECT_EQ(p.size(), 3u);
  AnalysisData in;
  in.Set("raw-text", std::string("abc"));
  const AnalysisData out = p.Run(in);
  EXPECT_EQ(out.Get<std::string>("probe"), "tokenize;tag;tag;");
  EXPECT_EQ(out.Get<std::string>("token-graph"), "tag");
  EXPECT_EQ(out.Get<std::string>("raw-text"), "abc");
}

TEST(PipelineTest, BuildErrors) {
  std::size_t step = 0;
  EXPECT_EQ(BuildError(Config({"tokenize", "foo"}), &step), PipelineErrc::kUnknownUnit);
  EXPECT_EQ(step, 2u);
  EXPECT_EQ(BuildError(Config({"tag"}), &step), PipelineErrc::kUnsatisfiedInput);
  EXPECT_EQ(step, 1u);
  EXPECT_EQ(BuildError(Config({"needs-param"})), PipelineErrc::kMissingParam);
  EXPECT_EQ(BuildError(Config({"needs-resource"})), PipelineErrc::kMissingResource);
}

TEST(PipelineTest, ReRegistrationReplacesFactory) {
  UnitRegistry r = StubRegistry();
  r.Register("tokenize", [](const UnitSetup &) {
    return std::make_unique<StubUnit>("second", std::vector<std::string>{},
                                      std::vector<std::string>{"probe"});
  });
  ResourceRegistry res;
  const Pipeline p = BuildPipeline(Config({"tokenize"}), r, res);
  EXPECT_EQ(p.Run({}).Get<std::string>("probe"), "second;");
}

TEST(PipelineTest, FailureAbortsWithoutPublishing) {
  std::atomic<int> calls{0};
  ResourceRegistry res;
  const Pipeline p =
      BuildPipeline(Config({"tokenize", "fail", "count"}), StubRegistry(&calls), res);
  AnalysisData in;
  in.Set("raw-text", std::string("abc"));
  try {
    p.Run(in);
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.kind(), PipelineErrc::kUnitFailure);
    EXPECT_EQ(e.step(), 2u);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
  EXPECT_EQ(calls.load(), 2);
}

TEST(PipelineTest, UndeclaredLayersRejected) {
  ResourceRegistry res;
  for (const char *unit : {"rogue", "snoop"}) {
    const Pipeline p = BuildPipeline(Config({unit}), StubRegistry(), res);
    AnalysisData in;
    in.Set("raw-text", std::string("abc"));
    try {
      p.Run(in);
      FAIL() << unit;
    } catch (const PipelineError &e) {
      EXPECT_EQ(e.kind(), PipelineErrc::kUndeclaredLayer);
      EXPECT_EQ(e.step(), 1u);
    }
  }
}

TEST(PipelineTest, MissingLayerIsDetectable) {
  AnalysisData d;
  try {
    d.Get("nothing");
    FAIL();
  } catch (const PipelineError &e) {
    EXPECT_EQ(e.kind(), PipelineErrc::kMissingLayer);
  }
  d.Set("n", std::string("x"));
  EXPECT_THROW(d.Get<AnalysisGraph>("n"), PipelineError);
}

TEST(PipelineTest, DeterministicSerialization) {
  ResourceRegistry res;
  const Pipeline p = BuildPipeline(Config({"tokenize", "tag"}), StubRegistry(), res);
  AnalysisData in;
  in.Set("raw-text", std::string("abc"));
  in.Set("scores", ScoreTable{{"b", 0.5}, {"a", 1.0 / 3.0}});
  EXPECT_EQ(p.Run(in).Serialize(), p.Run(in).Serialize());
}

TEST(PipelineTest, ConcurrentRunsShareOnePipeline) {
  ResourceRegistry res;
  const Pipeline p = BuildPipeline(Config({"tokenize", "tag"}), StubRegistry(), res);
  std::vector<std::string> results(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] {
      AnalysisData in;
      in.Set("raw-text", std::string("doc") + std::to_string(i));
      results[i] = p.Run(in).Serialize();
    });
  for (auto &t : threads) t.join();
  for (int i = 0; i < 4; ++i) EXPECT_NE(results[i].find("doc" + std::to_string(i)), std::string::npos);
}

TEST(ConfigTest, ParseFlattensGroups) {
  const PipelineConfig c = ParseConfig(
      "# comment\n"
      "pipeline demo lang=eng\n"
      "step tokenize\n"
      "begin analysis\n"
      "  step tag model=x.bin beam=1\n"
      "  begin inner\n"
      "    step count\n"
      "  end\n"
      "end\n"
      "resource model path=/tmp/m.bin\n");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.language, "eng");
  ASSERT_EQ(c.steps.size(), 3u);
  EXPECT_EQ(c.steps[1].unit, "tag");
  EXPECT_EQ(c.steps[1].params.at("beam"), "1");
  EXPECT_EQ(c.steps[2].unit, "count");
  EXPECT_EQ(c.resources.at("model"), "/tmp/m.bin");
  EXPECT_EQ(ParseConfig(WriteConfig(c)), c);
}

TEST(ConfigTest, Errors) {
  for (const char *text :
       {"", "step x\n", "pipeline a\n", "pipeline a lang=x\nbogus\n",
        "pipeline a lang=x\nbegin g\n", "pipeline a lang=x\nend\n",
        "pipeline a lang=x\nstep s novalue\n", "pipeline a lang=x\nresource r file=y\n"}) {
    try {
      ParseConfig(text);
      ADD_FAILURE() << text;
    } catch (const PipelineError &e) {
      EXPECT_EQ(e.kind(), PipelineErrc::kBadConfig);
    }
  }
}

TEST(ResourceTest, LoadedOncePerLanguageAndName) {
  ResourceRegistry res;
  int loads = 0;
  auto loader = [&]() -> std::shared_ptr<const int> {
    ++loads;
    return std::make_shared<const int>(7);
  };
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&] { EXPECT_EQ(*res.Get<int>("eng", "m", loader), 7); });
  for (auto &t : threads) t.join();
  EXPECT_EQ(loads, 1);
  EXPECT_EQ(res.load_count("eng", "m"), 1u);
  res.Get<int>("fra", "m", loader);
  EXPECT_EQ(loads, 2);
  EXPECT_THROW(res.Get<double>("eng", "m", [] { return std::make_shared<const double>(1); }),
               PipelineError);
}

TEST(ResourceTest, ResolveUsesModelDirLayout) {
  const auto dir = std::filesystem::temp_directory_path() / "deplima_res_test";
  std::filesystem::create_directories(dir / "toy");
  std::ofstream(dir / "toy" / "model.bin") << "x";
  ResourceRegistry res(dir.string());
  EXPECT_EQ(res.Resolve("toy", "model", "model.bin"), (dir / "toy" / "model.bin").string());
  EXPECT_THROW(res.Resolve("eng", "model", "model.bin"), PipelineError);
  res.SetPath("eng", "model", (dir / "toy" / "model.bin").string());
  EXPECT_NO_THROW(res.Resolve("eng", "model", "model.bin"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace deplima
