// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs fully offline against the mock provider.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lift/analysis.hpp"
#include "lift/expansion.hpp"
#include "lift/linalg.hpp"
#include "lift/pipeline.hpp"
#include "lift/prompts.hpp"
#include "lift/quality.hpp"
#include "lift/variety.hpp"
#include "oracles.hpp"
#include "pipeline_util.hpp"

using namespace lift;
using namespace lift::testing;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

/// Collects failure notes for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  int failed = 0;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void eigen_kernel(Check& c) {
  std::mt19937_64 rng(20240101);
  const auto t0 = Clock::now();
  double worst_resid = 0, worst_orth = 0, worst_val = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + rng() % 8;
    const double scale = std::pow(10.0, static_cast<int>(rng() % 5) - 2);
    const auto dense = oracle::random_symmetric(rng, d, scale);
    const auto cm = linalg::Matrix::from_rows(dense);
    const std::size_t k = 1 + rng() % d;
    const auto e = linalg::top_k_eigen(cm, k, 1e-10);
    const auto o = oracle::jacobi_eigen(dense);
    const double bound = 1e-10 * std::max(1.0, cm.frobenius_norm());
    for (double r : linalg::residuals(cm, e)) {
      worst_resid = std::max(worst_resid, r / bound);
      c.expect(r <= bound, "residual " + fmt("%.3g", r) + " above bound");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (j > 0) c.expect(e.eigenvalues[j - 1] >= e.eigenvalues[j], "eigenvalues not descending");
      const double dv = std::abs(e.eigenvalues[j] - o.values[j]);
      worst_val = std::max(worst_val, dv);
      c.expect(dv <= 1e-9, "eigenvalue differs from oracle by " + fmt("%.3g", dv));
      for (std::size_t l = 0; l < k; ++l) {
        double dot = 0;
        for (std::size_t i = 0; i < d; ++i) dot += e.eigenvectors(i, j) * e.eigenvectors(i, l);
        const double err = std::abs(dot - (j == l ? 1.0 : 0.0));
        worst_orth = std::max(worst_orth, err);
        c.expect(err <= 1e-8, "VtV deviates from I by " + fmt("%.3g", err));
      }
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  c.summary = "200 matrices, max residual/bound " + fmt("%.2g", worst_resid) + ", max |VtV-I| " +
              fmt("%.2g", worst_orth) + ", max |lambda-oracle| " + fmt("%.2g", worst_val) + ", " +
              fmt("%.3f s", secs);
}

void hand_example(Check& c) {
  EmbeddingMatrix x;
  x.rows = 3;
  x.dims = 2;
  x.values = {2, 0, 0, 2, -2, -2};
  x.row_ids = {"a", "b", "c"};
  const auto cov = covariance(x);
  c.expect(cov == linalg::Matrix::from_rows({{4, 2}, {2, 4}}), "covariance is not [[4,2],[2,4]]");
  const auto e = linalg::top_k_eigen(cov, 2);
  c.expect(std::abs(e.eigenvalues[0] - 6) <= 1e-12 && std::abs(e.eigenvalues[1] - 2) <= 1e-12,
           "eigenvalues are not (6, 2)");
  const auto r = project(x, e);
  const double s = std::sqrt(2.0);
  const std::vector<double> expect{s, s, s, -s, -2 * s, 0};
  for (std::size_t i = 0; i < 6; ++i) c.expect(std::abs(r.values[i] - expect[i]) <= 1e-12, "projection mismatch");
  const auto v = row_variances(r);
  c.expect(std::abs(v[0]) <= 1e-12 && std::abs(v[1] - 2) <= 1e-12 && std::abs(v[2] - 2) <= 1e-12,
           "row variances are not (0, 2, 2)");

  Dataset d;
  for (const auto& id : x.row_ids) d.records.push_back(make_record(id, "item " + id));
  VarietyConfig cfg;
  cfg.reduced_dim = 2;
  cfg.keep_fraction = 0.2;
  const auto res = variety_curate(d, x, cfg);
  c.expect(res.curated.size() == 1 && res.curated.records[0].id == "b", "selection is not {b}");
  c.summary = "eigenvalues (" + fmt("%.15g", e.eigenvalues[0]) + ", " + fmt("%.15g", e.eigenvalues[1]) +
              "), variances (" + fmt("%.3g", v[0]) + ", " + fmt("%.15g", v[1]) + ", " + fmt("%.15g", v[2]) +
              "), selected " + (res.curated.empty() ? std::string("-") : res.curated.records[0].id);
}

struct ScaleRun {
  TempDir dir;
  PipelineConfig cfg;
  double seconds = 0;
};

std::unique_ptr<ScaleRun> scale_run() {
  auto run = std::make_unique<ScaleRun>();
  write_seed_file(run->dir / "seed.jsonl", 600);
  run->cfg = config_from_json(mock_config_json(run->dir.path()));
  const auto t0 = Clock::now();
  Pipeline(run->cfg).run_all();
  run->seconds = seconds_since(t0);
  return run;
}

std::size_t lines(const fs::path& p) {
  const auto s = read_file(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void pipeline_arithmetic(Check& c, const ScaleRun& run) {
  const auto out = run.cfg.output_dir;
  const std::size_t seed = lines(run.cfg.input_path), expanded = lines(out / artifacts::kExpanded),
                    variety = lines(out / artifacts::kVariety), final_n = lines(out / artifacts::kFinal);
  c.expect(seed == 600, "seed size " + std::to_string(seed));
  c.expect(expanded == 1800, "expanded size " + std::to_string(expanded));
  c.expect(variety == 360, "variety size " + std::to_string(variety));
  c.expect(final_n == 100, "final size " + std::to_string(final_n));
  c.expect(run.cfg.mock_embedding_dims == 1536, "embedding dims changed");
  c.expect(run.seconds < 60.0, "runtime " + fmt("%.1f s", run.seconds));
  c.summary = std::to_string(seed) + " -> " + std::to_string(expanded) + " -> " + std::to_string(variety) + " -> " +
              std::to_string(final_n) + " with 1536-dim embeddings in " + fmt("%.1f s", run.seconds);
}

void determinism(Check& c, const ScaleRun& reference) {
  const std::vector<std::string> compared{artifacts::kFinal,       artifacts::kExpanded,    artifacts::kVariety,
                                          artifacts::kScored,      artifacts::kComposition, "composition.txt",
                                          artifacts::kHistogram,   "histogram.txt",         artifacts::kHistogramGpt,
                                          artifacts::kCost,        "cost.txt",              artifacts::kRunManifest};
  auto same_as_reference = [&](const PipelineConfig& cfg, const std::string& label) {
    for (const auto& f : compared)
      c.expect(read_file(cfg.output_dir / f) == read_file(reference.cfg.output_dir / f), label + " differs in " + f);
  };

  // Second independent run: fresh directory, fresh cache.
  TempDir again;
  write_seed_file(again / "seed.jsonl", 600);
  const auto cfg2 = config_from_json(mock_config_json(again.path()));
  Pipeline(cfg2).run_all();
  same_as_reference(cfg2, "second run");

  // Interrupted mid-scoring, then resumed.
  TempDir crash;
  write_seed_file(crash / "seed.jsonl", 600);
  const auto cfg3 = config_from_json(mock_config_json(crash.path()));
  bool crashed = false;
  {
    auto crashing = wrap_mock(cfg3, 150);
    Pipeline p(cfg3, wrapped_hooks(crashing));
    try {
      p.run_all();
    } catch (const std::exception&) {
      crashed = true;
    }
  }
  c.expect(crashed, "interrupted run did not stop");
  const auto status = nlohmann::json::parse(read_file(cfg3.output_dir / artifacts::kRunManifest));
  c.expect(status.value("failed_stage", "") == "score", "interruption not recorded at the score stage");
  auto resumed = wrap_mock(cfg3);
  Pipeline(cfg3, wrapped_hooks(resumed)).run_all();
  same_as_reference(cfg3, "resumed run");
  c.expect(resumed->embed_calls == 0, "resume re-embedded records");
  c.expect(resumed->score_calls < 360, "resume re-scored everything");
  c.summary = std::to_string(compared.size()) + " artifacts byte-identical across 2 runs; resume after crash at score call " +
              "151/360 re-issued " + std::to_string(resumed->score_calls.load()) + " judge calls and matched";
}

void score_fuzz(Check& c) {
  std::mt19937_64 rng(5150);
  const std::vector<std::string> prose{"The score is 85.", "Score: 90", "I would rate this highly", "eighty",
                                       "85/100", "85.5", "N/A", "#85", "85 points"};
  const std::vector<std::string> tails{"", "\nGood answer.", "\r\nSolid.\nMore detail.", "\n\n", "\nclarity 14"};
  std::size_t counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < 10000; ++i) {
    const int kind = static_cast<int>(rng() % 4);
    ++counts[kind];
    std::string text;
    int expect_total = 0;
    bool expect_ok = false, expect_oor = false;
    std::string lead = std::string(rng() % 3, '\n') + std::string(rng() % 3, ' ');
    switch (kind) {
      case 0: {  // valid first-line integer
        const int v = static_cast<int>(rng() % 101);
        text = lead + (rng() % 5 == 0 ? "+" : "") + std::to_string(v) + std::string(rng() % 2, ' ') +
               tails[rng() % tails.size()];
        expect_total = v;
        expect_ok = true;
        break;
      }
      case 1: {  // prose first line
        text = lead + prose[rng() % prose.size()] + tails[rng() % tails.size()];
        if (rng() % 3 == 0) text += "\n" + std::to_string(rng() % 101);
        break;
      }
      case 2: {  // out of range
        const bool high = rng() % 2;
        const long long v = high ? 101 + static_cast<long long>(rng() % 100000000000ULL)
                                 : -(1 + static_cast<long long>(rng() % 1000));
        text = lead + std::to_string(v) + tails[rng() % tails.size()];
        expect_total = high ? 100 : 0;
        expect_ok = true;
        expect_oor = true;
        break;
      }
      default: {  // empty or blank
        text = std::string(rng() % 4, rng() % 2 ? '\n' : ' ');
        break;
      }
    }
    GptScore s;
    try {
      s = parse_score_response(text);
    } catch (...) {
      c.expect(false, "parser threw");
      continue;
    }
    c.expect(s.total >= 0 && s.total <= 100, "total outside [0, 100]");
    c.expect(s.parse_ok || s.total == 0, "unparsed response with nonzero total");
    c.expect(s.total == expect_total && s.parse_ok == expect_ok && s.out_of_range == expect_oor,
             "unexpected parse of \"" + text + "\"");
  }

  // Zero on provider failure goes through the scoring path.
  class Down : public Provider {
   public:
    std::string identity() const override { return "down"; }
    Result<std::string> complete(const PromptPair&) override {
      return ProviderError{ErrorKind::kTransient, "connection reset", 0};
    }
    Result<std::vector<Vector>> embed(std::span<const std::string>) override {
      return ProviderError{ErrorKind::kTransient, "connection reset", 0};
    }
  };
  ProviderConfig pc;
  pc.max_retries = 1;
  pc.backoff_base = std::chrono::milliseconds(0);
  pc.backoff_cap = std::chrono::milliseconds(0);
  Gateway g(std::make_shared<Down>(), pc);
  QualityConfig qc;
  qc.few_shot_examples = default_few_shot(TaskProfile::kNlu);
  qc.keep_count = 1;
  const auto a = score_dataset(seed_dataset(3), g, qc);
  for (const auto& x : a)
    c.expect(a.size() == 3 && x.gpt.total == 0 && !x.gpt.parse_ok && x.gpt.provider_error.has_value(),
             "provider failure not scored as a flagged zero");
  c.summary = "10000 responses (" + std::to_string(counts[0]) + " valid, " + std::to_string(counts[1]) + " prose, " +
              std::to_string(counts[2]) + " out of range, " + std::to_string(counts[3]) +
              " empty), no throws; provider failures score 0";
}

void cost_report(Check& c) {
  struct Row {
    const char* label;
    double items, hours, co2;
  };
  const Row rows[] = {{"code original", 20000, 50.82, 4.58}, {"code expanded", 60000, 185.6, 16.7},
                      {"code curated", 10000, 31.6, 2.84},   {"nlu original", 25000, 40.24, 3.62},
                      {"nlu expanded", 100000, 149.76, 13.48}, {"nlu curated", 15000, 23.71, 2.13}};
  std::ostringstream detail;
  double worst = 0;
  for (const auto& r : rows) {
    const auto rep = estimate_cost(r.items, r.hours / (r.items / 1000.0), 0.09);
    const double direct = co2_from_gpu_hours(r.hours, 0.09);
    c.expect(std::abs(rep.gpu_hours - r.hours) <= 1e-9, std::string(r.label) + " gpu hours");
    c.expect(std::abs(rep.co2_kg - r.co2) <= 0.05, std::string(r.label) + " co2 " + fmt("%.3f", rep.co2_kg));
    c.expect(std::abs(direct - rep.co2_kg) <= 1e-12, std::string(r.label) + " co2 paths disagree");
    worst = std::max(worst, std::abs(rep.co2_kg - r.co2));
    detail << fmt("%.2f", r.hours) << "h->" << fmt("%.2f", rep.co2_kg) << " ";
  }
  c.summary = "6 rows, max |diff| " + fmt("%.4f kg", worst) + ": " + detail.str();
}

void pass_at_k_check(Check& c) {
  double worst = 0;
  std::size_t triples = 0;
  for (unsigned n = 1; n <= 20; ++n)
    for (unsigned cc = 0; cc <= n; ++cc)
      for (unsigned k = 1; k <= n; ++k) {
        const double got = pass_at_k(n, cc, k);
        const double err = std::abs(got - oracle::pass_at_k_exact(n, cc, k));
        worst = std::max(worst, err);
        c.expect(err <= 1e-12, "pass@k(" + std::to_string(n) + "," + std::to_string(cc) + "," + std::to_string(k) +
                                   ") off by " + fmt("%.3g", err));
        ++triples;
      }
  std::mt19937_64 rng(99);
  double worst_z = 0;
  for (int t = 0; t < 20; ++t) {
    const unsigned n = 21 + static_cast<unsigned>(rng() % 180);
    const unsigned cc = static_cast<unsigned>(rng() % (n / 4 + 1));
    const unsigned k = 1 + static_cast<unsigned>(rng() % 10);
    const double p = pass_at_k(n, cc, k);
    const std::size_t draws = 1000000;
    const double mc = oracle::pass_at_k_monte_carlo(n, cc, k, draws, rng());
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(draws));
    const double dev = std::abs(mc - p);
    if (sigma > 0) worst_z = std::max(worst_z, dev / sigma);
    c.expect(dev <= 3 * sigma + 1e-12, "Monte Carlo deviates on (" + std::to_string(n) + "," + std::to_string(cc) +
                                           "," + std::to_string(k) + ")");
  }
  c.summary = std::to_string(triples) + " exact triples, max error " + fmt("%.2g", worst) +
              "; 20 Monte Carlo triples x 1e6 draws, max deviation " + fmt("%.2f sigma", worst_z);
}

void composition(Check& c) {
  std::mt19937_64 rng(8);
  auto make = [&](const std::vector<std::size_t>& per_round) {
    Dataset d;
    for (std::size_t r = 0; r < per_round.size(); ++r)
      for (std::size_t i = 0; i < per_round[r]; ++i) {
        auto rec = make_record(std::to_string(r) + "-" + std::to_string(i), "x");
        rec.source_round = static_cast<int>(r);
        if (r > 0) rec.parent_id = "p";
        d.records.push_back(rec);
      }
    std::shuffle(d.records.begin(), d.records.end(), rng);
    return d;
  };
  for (std::size_t scale : {10, 100, 1000, 12345}) {
    const auto rep = composition_report(make({2 * scale, 3 * scale, 5 * scale}));
    c.expect(rep.entries.size() == 3, "wrong number of rounds");
    if (rep.entries.size() != 3) continue;
    c.expect(rep.entries[0].proportion == 0.2 && rep.entries[1].proportion == 0.3 && rep.entries[2].proportion == 0.5,
             "20/30/50 mixture not reported exactly at scale " + std::to_string(scale));
    c.expect(rep.entries[0].count == 2 * scale && rep.total == 10 * scale, "counts wrong");
  }
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::size_t> per(1 + rng() % 6);
    for (auto& x : per) x = rng() % 200;
    per[0] += 1;
    const auto rep = composition_report(make(per));
    double sum = 0;
    for (const auto& e : rep.entries) sum += e.proportion;
    worst = std::max(worst, std::abs(sum - 1.0));
    c.expect(std::abs(sum - 1.0) <= 1e-9, "proportions sum to " + fmt("%.17g", sum));
  }
  c.summary = "20/30/50 exact at 4 scales; 1000 random datasets, max |sum-1| " + fmt("%.2g", worst);
}

std::string golden(const std::string& name) {
  return read_file(fs::path(LIFT_SOURCE_DIR) / "tests" / "golden" / name);
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

void prompt_fidelity(Check& c) {
  const auto nlu_user = golden("nlu_rewrite_user.txt"), code_user = golden("code_rewrite_user.txt"),
             score_user = golden("score_user.txt");
  c.expect(std::string(prompts::kNluRewriteSystem) == golden("nlu_rewrite_system.txt"), "nlu system message");
  c.expect(std::string(prompts::kCodeRewriteSystem) == golden("code_rewrite_system.txt"), "code system message");
  c.expect(std::string(prompts::kScoreSystem) == golden("score_system.txt"), "score system message");
  c.expect(std::string(prompts::kNluRewriteUser) + std::string(prompts::kRewriteInputBlock) == nlu_user, "nlu template");
  c.expect(std::string(prompts::kCodeRewriteUser) + std::string(prompts::kRewriteInputBlock) == code_user,
           "code template");
  c.expect(std::string(prompts::kScoreUser) == score_user, "score template");

  auto lines_between = [](const std::string& text, const std::string& first_prefix, const std::string& stop) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    bool on = false;
    while (std::getline(in, line)) {
      if (line.rfind(first_prefix, 0) == 0) on = true;
      if (on && line == stop) break;
      if (on) out.push_back(line);
    }
    return out;
  };

  auto rec = [](std::string instr, std::string input, TaskProfile p) {
    auto r = make_record("x", std::move(instr), std::move(input), "answer", p);
    return r;
  };
  std::size_t rule_lines = 0;
  for (auto [profile, tmpl] : {std::pair{TaskProfile::kNlu, nlu_user}, std::pair{TaskProfile::kCode, code_user}}) {
    const auto rules = lines_between(tmpl, "(1) ", "");
    c.expect(rules.size() == (profile == TaskProfile::kNlu ? 3u : 5u), "rule list length");
    for (const auto& input : {std::string(), std::string("some {Input} text")}) {
      const auto p = build_rewrite_prompt(rec("Do {Instruction} things", input, profile));
      for (const auto& rule : rules) c.expect(contains(p.user, rule + "\n"), "missing rule line: " + rule);
      rule_lines += rules.size();
      std::string expect = tmpl;
      if (input.empty()) expect = expect.substr(0, expect.find("\n#Input#"));
      expect.replace(expect.find("{Instruction}"), 13, "Do {Instruction} things");
      if (!input.empty()) expect.replace(expect.rfind("{Input}"), 7, input);
      c.expect(p.user == expect, "rewrite prompt substitution");
    }
  }

  QualityConfig qc;
  qc.few_shot_examples = default_few_shot(TaskProfile::kCode);
  const auto p = build_score_prompt(rec("Sort numbers", "", TaskProfile::kCode), qc);
  const auto rubric = lines_between(score_user, "1. Clarity (15 points)", "Here's some examples and socres you can follow:");
  c.expect(rubric.size() == 4, "rubric should have 4 lines");
  c.expect(rubric.size() == 4 && rubric[3].rfind("4. Accuracy (35 points)", 0) == 0, "accuracy line");
  for (const auto& line : rubric) c.expect(contains(p.user, line + "\n"), "missing rubric line: " + line);
  c.expect(contains(p.user, "### Instruction:\nSort numbers\n### Input:\n\n### Response:\nanswer"),
           "record substitution");
  c.expect(!contains(p.user, "{EXAMPLE") && !contains(p.user, "{SCORE") && !contains(p.user, "{INSTRUCTION}"),
           "unsubstituted placeholder");
  for (std::size_t i = 0; i < 3; ++i)
    c.expect(contains(p.user, "### Score for Example " + std::to_string(i + 1) + ": " +
                                  std::to_string(qc.few_shot_examples[i].score) + "\n"),
             "example score " + std::to_string(i + 1));
  c.summary = "6 templates byte-identical to golden files; " + std::to_string(rule_lines) +
              " rule lines and 4 rubric lines present with exact substitutions";
}

void selection_oracle(Check& c) {
  std::mt19937_64 rng(777);
  std::normal_distribution<double> g(0.0, 1.0);
  std::size_t total_selected = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng() % 19, d = 2 + rng() % 5;
    std::vector<std::string> ids;
    std::set<std::string> used;
    while (ids.size() < n) {
      auto id = "doc" + std::to_string(rng() % 1000);
      if (used.insert(id).second) ids.push_back(id);
    }
    oracle::Dense rows(n, std::vector<double>(d));
    for (auto& r : rows)
      for (double& x : r) x = g(rng);
    VarietyConfig cfg;
    cfg.reduced_dim = 2 + static_cast<int>(rng() % (d - 1));
    cfg.keep_fraction = std::uniform_real_distribution<double>(0.05, 1.0)(rng);

    EmbeddingMatrix x;
    x.rows = n;
    x.dims = d;
    x.row_ids = ids;
    for (const auto& r : rows) x.values.insert(x.values.end(), r.begin(), r.end());
    Dataset ds;
    for (const auto& id : ids) ds.records.push_back(make_record(id, "text " + id));
    const auto res = variety_curate(ds, x, cfg);
    std::vector<std::string> got;
    for (const auto& r : res.curated.records) got.push_back(r.id);
    std::sort(got.begin(), got.end());
    const auto want = oracle::variety_select(rows, ids, static_cast<std::size_t>(cfg.reduced_dim), cfg.keep_fraction);
    c.expect(got == want, "corpus " + std::to_string(t) + " selection differs from oracle");
    total_selected += got.size();
  }
  c.summary = "100 corpora, " + std::to_string(total_selected) + " selected ids, all sets equal to the oracle";
}

}  // namespace

int main() {
  struct Criterion {
    int number;
    const char* name;
    std::function<void(Check&)> run;
  };
  std::unique_ptr<ScaleRun> reference;
  const std::vector<Criterion> criteria{
      {1, "eigen kernel correctness", eigen_kernel},
      {2, "variety hand example", hand_example},
      {3, "pipeline arithmetic 600 -> 1800 -> 360 -> 100",
       [&](Check& c) {
         reference = scale_run();
         pipeline_arithmetic(c, *reference);
       }},
      {4, "determinism and resumability",
       [&](Check& c) {
         if (!reference) reference = scale_run();
         determinism(c, *reference);
       }},
      {5, "score parsing robustness", score_fuzz},
      {6, "cost report reproduction", cost_report},
      {7, "pass@k exact and Monte Carlo", pass_at_k_check},
      {8, "composition report", composition},
      {9, "prompt fidelity", prompt_fidelity},
      {10, "small-instance selection oracle", selection_oracle},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check c;
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.failed == 0;
    if (!ok) ++failed;
    std::printf("[%s] %2d %s: %s\n", ok ? "PASS" : "FAIL", cr.number, cr.name, c.summary.c_str());
    for (const auto& f : c.failures) std::printf("       - %s\n", f.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
