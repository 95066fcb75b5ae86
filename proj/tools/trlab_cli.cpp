// tools/trlab_cli.cpp

// Copyright 2026 The trlab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: gen-data, train, decode, bench, sweep.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trlab/trlab.h"

namespace {

using json = nlohmann::ordered_json;

class CliError : public std::runtime_error {
 public:
  CliError(const std::string &msg, int exit_code = 1)
      : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

void Check(trlab_status status, const std::string &what) {
  if (status != TRLAB_OK)
    throw CliError(what + ": " + trlab_status_name(status) + ": " + trlab_last_error());
}

template <typename T, void (*Free)(T *)>
struct Deleter {
  void operator()(T *p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<trlab_dataset, Deleter<trlab_dataset, trlab_dataset_free>>;
using ModelPtr = std::unique_ptr<trlab_model, Deleter<trlab_model, trlab_model_free>>;
using ResultPtr =
    std::unique_ptr<trlab_decode_result, Deleter<trlab_decode_result, trlab_decode_result_free>>;

// ---- enum names ----

template <typename E>
struct EnumName {
  E value;
  const char *name;
};

constexpr EnumName<trlab_transducer> kModes[] = {{TRLAB_RNNT, "rnnt"}, {TRLAB_HAT, "hat"}};
constexpr EnumName<trlab_ctc_head> kHeads[] = {{TRLAB_HEAD_NONE, "none"},
                                               {TRLAB_HEAD_CTC, "ctc"},
                                               {TRLAB_HEAD_FCTC, "fctc"},
                                               {TRLAB_HEAD_IAM, "iam"}};
constexpr EnumName<trlab_algorithm> kAlgorithms[] = {
    {TRLAB_GREEDY_CTC, "greedy_ctc"}, {TRLAB_ALSD, "alsd"}, {TRLAB_TSD, "tsd"}};
constexpr EnumName<trlab_threshold_mode> kThresholds[] = {{TRLAB_THRESHOLD_NONE, "none"},
                                                          {TRLAB_THRESHOLD_HAT, "hat"},
                                                          {TRLAB_THRESHOLD_CTC, "ctc"},
                                                          {TRLAB_THRESHOLD_DUAL, "dual"}};
constexpr EnumName<trlab_blank_source> kSources[] = {{TRLAB_BLANK_IAM, "iam"},
                                                     {TRLAB_BLANK_FCTC, "fctc"}};
constexpr EnumName<trlab_split> kSplits[] = {
    {TRLAB_SPLIT_TRAIN, "train"}, {TRLAB_SPLIT_DEV, "dev"}, {TRLAB_SPLIT_TEST, "test"}};

template <typename E, std::size_t N>
const char *NameOf(const EnumName<E> (&table)[N], E value) {
  for (const auto &e : table)
    if (e.value == value) return e.name;
  return "?";
}

template <typename E, std::size_t N>
E Parse(const EnumName<E> (&table)[N], const std::string &name, const std::string &key) {
  for (const auto &e : table)
    if (name == e.name) return e.value;
  std::string allowed;
  for (const auto &e : table) allowed += std::string(allowed.empty() ? "" : ", ") + e.name;
  throw CliError("config: " + key + " = \"" + name + "\" is not one of {" + allowed + "}", 2);
}

// ---- configuration ----

json Defaults() {
  trlab_data_config d;
  trlab_data_config_default(&d);
  trlab_model_config m;
  trlab_model_config_default(&m);
  trlab_train_config t;
  trlab_train_config_default(&t);
  trlab_decode_config c;
  trlab_decode_config_default(&c);
  json j;
  j["data"] = {{"vocab_size", d.vocab_size},     {"feat_dim", d.feat_dim},
               {"min_duration", d.min_duration}, {"max_duration", d.max_duration},
               {"noise", d.noise},               {"min_tokens", d.min_tokens},
               {"max_tokens", d.max_tokens},     {"silence_prob", d.silence_prob},
               {"min_silence", d.min_silence},   {"max_silence", d.max_silence},
               {"train_count", d.train_count},   {"dev_count", d.dev_count},
               {"test_count", d.test_count},     {"seed", d.seed}};
  j["model"] = {{"mode", NameOf(kModes, m.mode)},
                {"ctc_head", NameOf(kHeads, m.ctc_head)},
                {"hidden_dim", m.hidden_dim},
                {"joint_dim", m.joint_dim},
                {"encoder_layers", m.encoder_layers},
                {"stride", m.stride},
                {"causal", m.causal != 0},
                {"seed", 1}};
  j["train"] = {{"alpha", t.alpha},
                {"beta", t.beta},
                {"learning_rate", t.learning_rate},
                {"warmup_steps", t.warmup_steps},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"grad_clip", t.grad_clip},
                {"seed", t.seed}};
  j["decode"] = {{"algorithm", NameOf(kAlgorithms, c.algorithm)},
                 {"beam", c.beam},
                 {"alsd_max_symbols", c.alsd_max_symbols},
                 {"tsd_max_expansions", c.tsd_max_expansions},
                 {"max_output_tokens", c.max_output_tokens},
                 {"split", "test"}};
  j["threshold"] = {{"mode", NameOf(kThresholds, c.threshold_mode)},
                    {"hat_lambda", c.hat_lambda},
                    {"ctc_lambda", c.ctc_lambda},
                    {"blank_source", NameOf(kSources, c.blank_source)}};
  j["bench"] = {{"warmup_runs", 1}, {"runs", 3}};
  j["paths"] = {{"data", "data.trds"},       {"model", "model.ckpt"},
                {"trace", "loss_trace.csv"}, {"report", "decode_report.csv"},
                {"summary", "summary.csv"},  {"curve", "sweep_curve.csv"},
                {"bench", "bench.csv"}};
  return j;
}

// Overlays `user` onto `base`, rejecting keys and types the defaults lack.
void Overlay(json &base, const json &user, const std::string &where) {
  if (!user.is_object()) throw CliError("config: " + where + " must be an object", 2);
  for (const auto &[key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw CliError("config: unknown key '" + path + "'", 2);
    json &slot = base[key];
    if (slot.is_object()) {
      Overlay(slot, value, path);
    } else if (slot.is_number() && value.is_number()) {
      if (slot.is_number_unsigned() && !value.is_number_unsigned())
        throw CliError("config: '" + path + "' must be a non-negative integer", 2);
      if (slot.is_number_integer() && value.is_number_float())
        throw CliError("config: '" + path + "' must be an integer", 2);
      slot = value;
    } else if (slot.type() == value.type()) {
      slot = value;
    } else {
      throw CliError("config: '" + path + "' has type " + value.type_name() + ", expected " +
                         slot.type_name(),
                     2);
    }
  }
}

struct PathOverride {
  const char *key;
  const char *env;
  std::string flag;
};

struct Options {
  std::string config_path;
  unsigned jobs = 1;
  std::vector<PathOverride> paths{{"data", "TRLAB_DATA", {}},
                                  {"model", "TRLAB_MODEL", {}},
                                  {"trace", "TRLAB_TRACE", {}},
                                  {"report", "TRLAB_REPORT", {}},
                                  {"summary", "TRLAB_SUMMARY", {}},
                                  {"curve", "TRLAB_CURVE", {}},
                                  {"bench", "TRLAB_BENCH", {}}};
  std::string split;
  std::string sweep;
};

json Resolve(const Options &opt) {
  json cfg = Defaults();
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) throw CliError("cannot read config file " + opt.config_path, 2);
    json user;
    try {
      user = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error &e) {
      throw CliError("config: " + std::string(e.what()), 2);
    }
    Overlay(cfg, user, "");
  }
  // Path precedence: flag > environment > config file.
  for (const PathOverride &p : opt.paths) {
    if (!p.flag.empty()) {
      cfg["paths"][p.key] = p.flag;
    } else if (const char *env = std::getenv(p.env); env != nullptr && *env != '\0') {
      cfg["paths"][p.key] = env;
    }
  }
  if (!opt.split.empty()) cfg["decode"]["split"] = opt.split;
  return cfg;
}

// Hash of everything that determines non-timing outputs; paths excluded.
uint64_t ConfigHash(const json &cfg) {
  json keyed = cfg;
  keyed.erase("paths");
  const std::string text = keyed.dump();
  return trlab_hash(text.data(), text.size());
}

std::string HashHex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

template <typename T>
T Get(const json &cfg, const char *section, const char *key) {
  return cfg.at(section).at(key).get<T>();
}

trlab_data_config DataConfig(const json &cfg) {
  trlab_data_config d;
  trlab_data_config_default(&d);
  d.vocab_size = Get<uint32_t>(cfg, "data", "vocab_size");
  d.feat_dim = Get<uint32_t>(cfg, "data", "feat_dim");
  d.min_duration = Get<uint32_t>(cfg, "data", "min_duration");
  d.max_duration = Get<uint32_t>(cfg, "data", "max_duration");
  d.noise = Get<double>(cfg, "data", "noise");
  d.min_tokens = Get<uint32_t>(cfg, "data", "min_tokens");
  d.max_tokens = Get<uint32_t>(cfg, "data", "max_tokens");
  d.silence_prob = Get<double>(cfg, "data", "silence_prob");
  d.min_silence = Get<uint32_t>(cfg, "data", "min_silence");
  d.max_silence = Get<uint32_t>(cfg, "data", "max_silence");
  d.train_count = Get<uint32_t>(cfg, "data", "train_count");
  d.dev_count = Get<uint32_t>(cfg, "data", "dev_count");
  d.test_count = Get<uint32_t>(cfg, "data", "test_count");
  d.stride = Get<uint32_t>(cfg, "model", "stride");
  d.seed = Get<uint64_t>(cfg, "data", "seed");
  return d;
}

trlab_model_config ModelConfig(const json &cfg) {
  trlab_model_config m;
  trlab_model_config_default(&m);
  m.mode = Parse(kModes, Get<std::string>(cfg, "model", "mode"), "model.mode");
  m.ctc_head = Parse(kHeads, Get<std::string>(cfg, "model", "ctc_head"), "model.ctc_head");
  m.feat_dim = Get<uint32_t>(cfg, "data", "feat_dim");
  m.vocab_size = Get<uint32_t>(cfg, "data", "vocab_size");
  m.hidden_dim = Get<uint32_t>(cfg, "model", "hidden_dim");
  m.joint_dim = Get<uint32_t>(cfg, "model", "joint_dim");
  m.encoder_layers = Get<uint32_t>(cfg, "model", "encoder_layers");
  m.stride = Get<uint32_t>(cfg, "model", "stride");
  m.causal = Get<bool>(cfg, "model", "causal") ? 1 : 0;
  return m;
}

trlab_train_config TrainConfig(const json &cfg, unsigned jobs) {
  trlab_train_config t;
  trlab_train_config_default(&t);
  t.alpha = Get<double>(cfg, "train", "alpha");
  t.beta = Get<double>(cfg, "train", "beta");
  t.learning_rate = Get<double>(cfg, "train", "learning_rate");
  t.warmup_steps = Get<uint32_t>(cfg, "train", "warmup_steps");
  t.epochs = Get<uint32_t>(cfg, "train", "epochs");
  t.batch_size = Get<uint32_t>(cfg, "train", "batch_size");
  t.grad_clip = Get<double>(cfg, "train", "grad_clip");
  t.seed = Get<uint64_t>(cfg, "train", "seed");
  t.jobs = jobs;
  return t;
}

trlab_decode_config DecodeConfig(const json &cfg) {
  trlab_decode_config c;
  trlab_decode_config_default(&c);
  c.algorithm =
      Parse(kAlgorithms, Get<std::string>(cfg, "decode", "algorithm"), "decode.algorithm");
  c.beam = Get<uint32_t>(cfg, "decode", "beam");
  c.alsd_max_symbols = Get<double>(cfg, "decode", "alsd_max_symbols");
  c.tsd_max_expansions = Get<uint32_t>(cfg, "decode", "tsd_max_expansions");
  c.max_output_tokens = Get<uint32_t>(cfg, "decode", "max_output_tokens");
  c.threshold_mode =
      Parse(kThresholds, Get<std::string>(cfg, "threshold", "mode"), "threshold.mode");
  c.hat_lambda = Get<double>(cfg, "threshold", "hat_lambda");
  c.ctc_lambda = Get<double>(cfg, "threshold", "ctc_lambda");
  c.blank_source = Parse(kSources, Get<std::string>(cfg, "threshold", "blank_source"),
                         "threshold.blank_source");
  return c;
}

// Removes registered outputs unless the run commits.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    for (const std::string &p : paths_) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
      std::filesystem::remove(p + ".partial", ec);
    }
  }
  const std::string &Add(const std::string &path) {
    paths_.push_back(path);
    return path;
  }
  void Commit() { committed_ = true; }

 private:
  std::vector<std::string> paths_;
  bool committed_ = false;
};

struct Context {
  json cfg;
  uint64_t hash = 0;
  unsigned jobs = 1;

  std::string Path(const char *key) const { return cfg.at("paths").at(key).get<std::string>(); }
  // Paths are left out so that relocated reruns produce identical bytes.
  std::string Metadata() const {
    json keyed = cfg;
    keyed.erase("paths");
    return "config_hash=" + HashHex(hash) + "\n" + keyed.dump();
  }
};

DatasetPtr LoadData(const Context &ctx) {
  trlab_dataset *d = nullptr;
  Check(trlab_dataset_load(ctx.Path("data").c_str(), &d), "load dataset");
  return DatasetPtr(d);
}

ModelPtr LoadModel(const Context &ctx) {
  trlab_model *m = nullptr;
  Check(trlab_model_load(ctx.Path("model").c_str(), &m), "load model");
  return ModelPtr(m);
}

trlab_split SplitOf(const Context &ctx) {
  return Parse(kSplits, Get<std::string>(ctx.cfg, "decode", "split"), "decode.split");
}

ResultPtr RunDecode(const Context &ctx, const trlab_model *model, const trlab_dataset *data,
                    const trlab_decode_config &dc, unsigned jobs) {
  trlab_decode_result *r = nullptr;
  Check(trlab_decode(model, data, SplitOf(ctx), &dc, jobs, &r), "decode");
  return ResultPtr(r);
}

trlab_summary SummaryOf(const trlab_decode_result *r) {
  trlab_summary s;
  Check(trlab_decode_result_summary(r, &s), "summary");
  return s;
}

void PrintSummary(const char *label, const trlab_summary &s) {
  std::fprintf(stderr,
               "[%s] wer=%.2f%% (S=%llu I=%llu D=%llu / %llu) nbp=%.2f%% jcr=%.2f%% rtf=%.4f "
               "oracle_nbp=%.2f%%\n",
               label, s.wer, static_cast<unsigned long long>(s.substitutions),
               static_cast<unsigned long long>(s.insertions),
               static_cast<unsigned long long>(s.deletions),
               static_cast<unsigned long long>(s.reference_tokens), s.nbp, s.jcr, s.rtf,
               s.oracle_nbp);
}

void GenData(const Context &ctx) {
  Outputs outputs;
  trlab_data_config d = DataConfig(ctx.cfg);
  trlab_dataset *raw = nullptr;
  Check(trlab_dataset_generate(&d, ctx.jobs, &raw), "generate");
  DatasetPtr data(raw);
  Check(trlab_dataset_set_metadata(data.get(), ctx.Metadata().c_str()), "metadata");
  Check(trlab_dataset_save(data.get(), outputs.Add(ctx.Path("data")).c_str()), "save dataset");
  outputs.Commit();
  for (const auto &s : kSplits) {
    double nbp = 0.0;
    Check(trlab_dataset_oracle_nbp(data.get(), s.value, d.stride, &nbp), "oracle nbp");
    std::printf("%s: %zu utterances, oracle NBP %.2f%%\n", s.name,
                trlab_dataset_size(data.get(), s.value), nbp);
  }
  std::printf("wrote %s\n", ctx.Path("data").c_str());
}

void Train(const Context &ctx) {
  Outputs outputs;
  DatasetPtr data = LoadData(ctx);
  const trlab_model_config mc = ModelConfig(ctx.cfg);
  trlab_model *raw = nullptr;
  Check(trlab_model_create(&mc, Get<uint64_t>(ctx.cfg, "model", "seed"), &raw), "create model");
  ModelPtr model(raw);
  const trlab_train_config tc = TrainConfig(ctx.cfg, ctx.jobs);
  trlab_train_summary summary{};
  auto on_epoch = [](const trlab_epoch_record *r, void *) {
    std::fprintf(stderr, "epoch %u %-10s rnnt=%.4f ctc=%.4f ilm=%.4f joint=%.4f\n", r->epoch,
                 r->split, r->rnnt, r->ctc, r->ilm, r->joint);
  };
  Check(trlab_model_train(model.get(), data.get(), &tc, on_epoch, nullptr, &summary), "train");
  Check(trlab_model_set_metadata(model.get(), ctx.Metadata().c_str()), "metadata");
  Check(trlab_model_save(model.get(), outputs.Add(ctx.Path("model")).c_str()), "save model");
  Check(trlab_model_write_loss_trace(model.get(), outputs.Add(ctx.Path("trace")).c_str(),
                                     ctx.hash),
        "write loss trace");
  outputs.Commit();
  std::printf("best epoch %u (dev joint loss %.4f), %llu utterances skipped\n",
              summary.best_epoch, summary.best_dev_loss,
              static_cast<unsigned long long>(summary.skipped_utterances));
  std::printf("wrote %s and %s\n", ctx.Path("model").c_str(), ctx.Path("trace").c_str());
}

void Decode(const Context &ctx) {
  Outputs outputs;
  DatasetPtr data = LoadData(ctx);
  ModelPtr model = LoadModel(ctx);
  const trlab_decode_config dc = DecodeConfig(ctx.cfg);
  ResultPtr result = RunDecode(ctx, model.get(), data.get(), dc, ctx.jobs);
  Check(trlab_decode_result_write_report(result.get(), outputs.Add(ctx.Path("report")).c_str(),
                                         ctx.hash),
        "write report");
  Check(trlab_decode_result_write_summary(result.get(),
                                          outputs.Add(ctx.Path("summary")).c_str(), ctx.hash),
        "write summary");
  outputs.Commit();
  PrintSummary(NameOf(kThresholds, dc.threshold_mode), SummaryOf(result.get()));
  std::printf("wrote %s and %s\n", ctx.Path("report").c_str(), ctx.Path("summary").c_str());
}

void Bench(const Context &ctx) {
  Outputs outputs;
  DatasetPtr data = LoadData(ctx);
  ModelPtr model = LoadModel(ctx);
  const trlab_decode_config configured = DecodeConfig(ctx.cfg);
  std::vector<trlab_decode_config> variants;
  trlab_decode_config baseline = configured;
  baseline.threshold_mode = TRLAB_THRESHOLD_NONE;
  variants.push_back(baseline);
  if (configured.threshold_mode != TRLAB_THRESHOLD_NONE) variants.push_back(configured);
  const auto warmup = Get<uint32_t>(ctx.cfg, "bench", "warmup_runs");
  const auto runs = Get<uint32_t>(ctx.cfg, "bench", "runs");
  if (runs == 0) throw CliError("config: bench.runs must be >= 1", 2);

  std::string csv = "# config_hash=" + HashHex(ctx.hash) + "\n" +
                    "mode,lambda_ctc,lambda_hat,run,wer,nbp,jcr,rtf,decode_s,audio_s\n";
  for (const trlab_decode_config &dc : variants) {
    // Timing runs are single-threaded.
    for (uint32_t i = 0; i < warmup; ++i) RunDecode(ctx, model.get(), data.get(), dc, 1);
    std::vector<double> rtfs;
    for (uint32_t i = 0; i < runs; ++i) {
      ResultPtr r = RunDecode(ctx, model.get(), data.get(), dc, 1);
      const trlab_summary s = SummaryOf(r.get());
      rtfs.push_back(s.rtf);
      char row[256];
      std::snprintf(row, sizeof(row), "%s,%g,%g,%u,%g,%g,%g,%g,%g,%g\n",
                    NameOf(kThresholds, dc.threshold_mode), dc.ctc_lambda, dc.hat_lambda, i + 1,
                    s.wer, s.nbp, s.jcr, s.rtf, s.decode_seconds, s.audio_seconds);
      csv += row;
    }
    std::sort(rtfs.begin(), rtfs.end());
    std::printf("%-5s median RTF %.5f over %u runs (%u warm-up excluded)\n",
                NameOf(kThresholds, dc.threshold_mode), rtfs[rtfs.size() / 2], runs, warmup);
  }
  const std::string path = outputs.Add(ctx.Path("bench"));
  std::ofstream out(path, std::ios::binary);
  if (!(out << csv) || !out.flush()) throw CliError("cannot write " + path);
  out.close();
  outputs.Commit();
  std::printf("wrote %s\n", path.c_str());
}

void Sweep(const Context &ctx, std::string which) {
  Outputs outputs;
  DatasetPtr data = LoadData(ctx);
  ModelPtr model = LoadModel(ctx);
  const trlab_decode_config base = DecodeConfig(ctx.cfg);
  if (which.empty()) which = NameOf(kThresholds, base.threshold_mode);
  const trlab_threshold_mode mode = Parse(kThresholds, which, "sweep");
  if (mode == TRLAB_THRESHOLD_NONE) throw CliError("sweep needs mode hat, ctc or dual", 2);

  std::vector<trlab_decode_config> grid;
  for (int a = 0; a <= 16; a += 2) {
    for (int b = 0; b <= 16; b += 2) {
      if (mode != TRLAB_THRESHOLD_DUAL && b > 0) break;
      trlab_decode_config dc = base;
      dc.threshold_mode = mode;
      if (mode == TRLAB_THRESHOLD_HAT) dc.hat_lambda = a;
      if (mode == TRLAB_THRESHOLD_CTC) dc.ctc_lambda = a;
      if (mode == TRLAB_THRESHOLD_DUAL) dc.ctc_lambda = a, dc.hat_lambda = b;
      grid.push_back(dc);
    }
  }
  std::vector<ResultPtr> results;
  for (const trlab_decode_config &dc : grid) {
    results.push_back(RunDecode(ctx, model.get(), data.get(), dc, ctx.jobs));
    const trlab_summary s = SummaryOf(results.back().get());
    std::fprintf(stderr, "lambda_ctc=%g lambda_hat=%g wer=%.2f nbp=%.2f jcr=%.2f\n",
                 dc.ctc_lambda, dc.hat_lambda, s.wer, s.nbp, s.jcr);
  }
  std::vector<const trlab_decode_result *> raw;
  for (const ResultPtr &r : results) raw.push_back(r.get());
  Check(trlab_write_sweep_curve(raw.data(), raw.size(), outputs.Add(ctx.Path("curve")).c_str(),
                                ctx.hash),
        "write curve");
  outputs.Commit();
  std::printf("wrote %zu rows to %s\n", raw.size(), ctx.Path("curve").c_str());
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"trlab: transducer blank-thresholding toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App *cmd, std::initializer_list<const char *> path_keys) {
    cmd->add_option("-c,--config", opt.config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("-j,--jobs", opt.jobs, "parallel jobs")->check(CLI::Range(1u, 256u));
    for (const char *key : path_keys) {
      for (PathOverride &p : opt.paths) {
        if (std::string(p.key) == key)
          cmd->add_option(std::string("--") + key, p.flag,
                          std::string(key) + " path (overrides $" + p.env + ")");
      }
    }
  };
  CLI::App *gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  add_common(gen, {"data"});
  CLI::App *train = app.add_subcommand("train", "train a model");
  add_common(train, {"data", "model", "trace"});
  CLI::App *decode = app.add_subcommand("decode", "decode a split and score it");
  add_common(decode, {"data", "model", "report", "summary"});
  CLI::App *bench = app.add_subcommand("bench", "time decoding (single job)");
  add_common(bench, {"data", "model", "bench"});
  CLI::App *sweep = app.add_subcommand("sweep", "sweep thresholds over 0,2,...,16");
  add_common(sweep, {"data", "model", "curve"});
  sweep->add_option("--mode", opt.sweep, "hat, ctc or dual (default: threshold.mode)");
  for (CLI::App *cmd : {decode, bench, sweep})
    cmd->add_option("--split", opt.split, "train, dev or test");

  CLI11_PARSE(app, argc, argv);

  try {
    Context ctx;
    ctx.cfg = Resolve(opt);
    ctx.hash = ConfigHash(ctx.cfg);
    ctx.jobs = bench->parsed() ? 1 : opt.jobs;
    std::fprintf(stderr, "resolved config (hash %s, jobs %u):\n%s\n", HashHex(ctx.hash).c_str(),
                 ctx.jobs, ctx.cfg.dump(2).c_str());
    if (gen->parsed()) GenData(ctx);
    if (train->parsed()) Train(ctx);
    if (decode->parsed()) Decode(ctx);
    if (bench->parsed()) Bench(ctx);
    if (sweep->parsed()) Sweep(ctx, opt.sweep);
  } catch (const CliError &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const json::exception &e) {
    std::fprintf(stderr, "error: config: %s\n", e.what());
    return 2;
  }
  return 0;
}
