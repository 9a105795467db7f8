#include "lcsampler/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcsampler/bundled_specs.hpp"
#include "lcsampler/errors.hpp"
#include "lcsampler/evaluation.hpp"
#include "lcsampler/fitting.hpp"
#include "lcsampler/format.hpp"
#include "lcsampler/pool.hpp"
#include "lcsampler/strategy.hpp"

namespace lcs {

namespace {

using nlohmann::json;

struct SimulateArgs {
  std::string specs_path;
  std::vector<std::int64_t> volumes;
  std::int64_t repeats = kDefaultRepeats;
  std::int64_t target_volume = kDefaultTargetVolume;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
};

struct IngestArgs {
  std::string in;
  std::string out;
  std::string format = "csv";
};

struct EvaluateArgs {
  std::string pool;
  std::vector<std::string> presets;
  std::string plan_json;
  std::string label;
  std::string k = "";
  std::int64_t trials = 30;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  bool exact_volumes = false;
};

struct FitArgs {
  std::string points;
  std::int64_t target_volume = 0;
  std::string format = "text";
};

struct PresetsArgs {
  std::string format = "text";
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& contents) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << contents;
    if (!out.flush()) throw InputError("failed writing '" + path + "'");
  }
  // Exit status 0 promises the file on disk is what we meant to write.
  if (read_file(path) != contents) throw InputError("verification of '" + path + "' failed");
}

json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

unsigned thread_cap() {
  const char* env = std::getenv("LCSAMPLER_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  try {
    const long v = std::stol(env);
    if (v < 1) throw InputError("LCSAMPLER_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  } catch (const std::logic_error&) {
    throw InputError("LCSAMPLER_THREADS must be a positive integer");
  }
}

std::string join_ints(const std::vector<std::int64_t>& values) {
  std::string out;
  for (auto v : values) {
    if (!out.empty()) out += ',';
    out += std::to_string(v);
  }
  return out;
}

int cmd_simulate_pool(const SimulateArgs& a, std::ostream& out) {
  std::vector<SimCurveSpec> specs;
  if (a.specs_path.empty()) {
    specs = default_curve_specs();
  } else {
    specs = curve_specs_from_json(parse_json_text(read_file(a.specs_path), a.specs_path));
  }
  const auto volumes = a.volumes.empty() ? default_volumes(a.target_volume) : a.volumes;
  const auto pool = generate_simulated_pool(specs, volumes, a.repeats, a.target_volume, a.seed);

  std::string contents;
  if (a.format == "json") {
    json doc = to_json(pool);
    doc["config"] = {{"command", "simulate-pool"},
                     {"seed", a.seed},
                     {"repeats", a.repeats},
                     {"target_volume", a.target_volume},
                     {"volumes", volumes},
                     {"specs", a.specs_path.empty() ? "bundled" : a.specs_path}};
    contents = doc.dump(2) + "\n";
  } else {
    std::ostringstream s;
    s << "# lcsampler simulate-pool seed=" << a.seed << " repeats=" << a.repeats
      << " target_volume=" << a.target_volume << " specs=" << (a.specs_path.empty() ? "bundled" : a.specs_path)
      << " volumes=" << join_ints(volumes) << '\n';
    export_csv(pool, s);
    contents = s.str();
  }
  write_file(a.out, contents);

  const double lo = static_cast<double>(volumes.empty() ? a.target_volume : volumes.front());
  out << "entries: " << pool.entries().size() << '\n'
      << "models: " << pool.model_count() << '\n'
      << "checksum: fnv1a64:" << hex64(fnv1a64(contents)) << '\n';
  if (lo < static_cast<double>(a.target_volume))
    out << "crossings: " << count_crossings(specs, lo, static_cast<double>(a.target_volume)) << '\n';
  return 0;
}

PerformancePool load_pool(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open pool '" + path + "'");
  try {
    return ingest_csv(in);
  } catch (const Error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const auto pool = load_pool(a.in);
  std::string contents = a.format == "json" ? to_json(pool).dump(2) + "\n" : export_csv(pool);
  if (!a.out.empty()) write_file(a.out, contents);
  out << "entries: " << pool.entries().size() << '\n'
      << "models: " << pool.model_count() << '\n'
      << "volumes: " << join_ints(pool.volumes()) << '\n'
      << "target_volume: " << pool.target_volume() << '\n'
      << "checksum: fnv1a64:" << hex64(fnv1a64(contents)) << '\n';
  return 0;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.presets.empty() == a.plan_json.empty())
    throw InputError("give either --preset or --plan-json");
  const auto pool = load_pool(a.pool);
  const auto m = static_cast<std::int64_t>(pool.model_count());

  std::vector<std::pair<std::string, SamplingPlan>> runs;
  if (!a.plan_json.empty()) {
    const bool inline_json = a.plan_json.find('{') != std::string::npos;
    const auto text = inline_json ? a.plan_json : read_file(a.plan_json);
    runs.emplace_back(a.label.empty() ? "plan" : a.label,
                      plan_from_json(parse_json_text(text, inline_json ? "--plan-json" : a.plan_json)));
  } else {
    const auto catalog = builtin_presets();
    for (const auto& name : a.presets) runs.emplace_back(name, find_preset(catalog, name).plan);
  }

  const auto k_values = a.k.empty() ? all_k_values(pool) : parse_k_list(a.k);
  for (auto k : k_values) {
    if (k > m) throw InputError("k = " + std::to_string(k) + " exceeds the number of models m = " + std::to_string(m));
  }

  TrialOptions options;
  options.trials = a.trials;
  options.master_seed = a.seed;
  options.threads = thread_cap();
  options.execute.exact_volumes = a.exact_volumes;

  std::vector<FrontierSeries> series;
  for (const auto& [label, plan] : runs) series.push_back(run_trials(pool, plan, k_values, options, label));

  std::string contents;
  if (a.format == "json") {
    json doc;
    doc["config"] = {{"command", "evaluate"},
                     {"pool", a.pool},
                     {"seed", a.seed},
                     {"trials", a.trials},
                     {"k", k_values},
                     {"exact_volumes", a.exact_volumes}};
    doc["series"] = json::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
      auto s = to_json(series[i]);
      s["plan"] = to_json(runs[i].second);
      doc["series"].push_back(std::move(s));
    }
    contents = doc.dump(2) + "\n";
  } else {
    std::vector<std::string> comments;
    std::ostringstream cfg;
    cfg << "lcsampler evaluate pool=" << a.pool << " seed=" << a.seed << " trials=" << a.trials
        << " k=" << join_ints(k_values) << " exact_volumes=" << (a.exact_volumes ? 1 : 0);
    comments.push_back(cfg.str());
    for (const auto& [label, plan] : runs) comments.push_back("plan " + label + " " + to_json(plan).dump());
    std::ostringstream s;
    write_frontier_csv(series, s, comments);
    contents = s.str();
  }
  write_file(a.out, contents);
  out << "series: " << series.size() << '\n'
      << "rows: " << series.size() * k_values.size() << '\n'
      << "checksum: fnv1a64:" << hex64(fnv1a64(contents)) << '\n';
  return 0;
}

std::vector<AveragedSample> load_fit_points(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open points '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::map<std::int64_t, std::pair<double, std::int64_t>> sums;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      if (line != "volume,loss") throw SchemaError("row " + std::to_string(line_no) + ": expected header 'volume,loss'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw SchemaError("row " + std::to_string(line_no) + ": expected 'volume,loss'");
    std::int64_t volume = 0;
    double loss = 0.0;
    try {
      std::size_t used = 0;
      volume = std::stoll(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("volume");
      const auto rest = line.substr(comma + 1);
      loss = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("loss");
    } catch (const std::logic_error&) {
      throw SchemaError("row " + std::to_string(line_no) + ": cannot parse '" + line + "'");
    }
    if (volume <= 0) throw ValueError("row " + std::to_string(line_no) + ": volume must be positive");
    if (!(loss > 0.0) || !std::isfinite(loss))
      throw DomainError("row " + std::to_string(line_no) + ": loss must be positive for a power-law fit");
    auto& [sum, count] = sums[volume];
    sum += loss;
    ++count;
  }
  if (!header) throw SchemaError("missing header 'volume,loss'");
  std::vector<AveragedSample> points;
  for (const auto& [volume, acc] : sums)
    points.push_back({volume, acc.first / static_cast<double>(acc.second), acc.second});
  if (points.size() < 2)
    throw InputError("need at least two distinct volumes, got " + std::to_string(points.size()));
  return points;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const auto points = load_fit_points(a.points);
  const auto fit = fit_power_law_nlls(points);
  const double prediction = predict(fit, a.target_volume);
  if (a.format == "json") {
    auto doc = to_json(fit);
    doc["target_volume"] = a.target_volume;
    doc["prediction"] = prediction;
    out << doc.dump(2) << '\n';
    return 0;
  }
  out << std::setprecision(17) << "method: " << to_string(fit.method) << '\n'
      << "theta1: " << format_double(fit.curve->theta1) << '\n'
      << "theta2: " << format_double(fit.curve->theta2) << '\n'
      << "residual: " << format_double(fit.residual) << '\n'
      << "converged: " << (fit.converged ? "true" : "false") << '\n'
      << "iterations: " << fit.iterations << '\n'
      << "target_volume: " << a.target_volume << '\n'
      << "prediction: " << format_double(prediction) << '\n';
  return 0;
}

int cmd_presets(const PresetsArgs& a, std::ostream& out) {
  const auto presets = builtin_presets();
  if (a.format == "json") {
    json doc = json::array();
    for (const auto& p : presets) {
      auto plan = to_json(p.plan);
      doc.push_back({{"label", p.label}, {"plan", plan}, {"nominal_budget", p.nominal_budget}});
    }
    out << doc.dump(2) << '\n';
    return 0;
  }
  for (const auto& p : presets) {
    std::string fractions;
    for (double f : p.plan.volume_fractions) {
      if (!fractions.empty()) fractions += ',';
      fractions += format_double(f);
    }
    out << p.label << "  kind=" << to_string(p.plan.kind) << " fractions=" << fractions
        << " repeats=" << p.plan.repeats << " budget=" << format_double(p.plan.budget_fraction())
        << " nominal=" << format_double(p.nominal_budget) << '\n';
  }
  return 0;
}

}  // namespace

std::vector<std::int64_t> parse_k_list(const std::string& text) {
  std::vector<std::int64_t> out;
  std::set<std::int64_t> seen;
  auto push = [&](std::int64_t k) {
    if (k < 1) throw InputError("k values must be positive");
    if (!seen.insert(k).second) throw InputError("duplicate k value " + std::to_string(k));
    out.push_back(k);
  };
  auto parse_int = [&](const std::string& s) {
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError("cannot parse k value '" + s + "'");
    return v;
  };
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      push(parse_int(item));
      continue;
    }
    const auto lo = parse_int(item.substr(0, dots));
    const auto hi = parse_int(item.substr(dots + 2));
    if (hi < lo) throw InputError("empty k range '" + item + "'");
    for (auto k = lo; k <= hi; ++k) push(k);
  }
  if (out.empty()) throw InputError("empty k list");
  std::sort(out.begin(), out.end());
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learning-curve sampling strategies: simulate pools, fit power laws, evaluate cost/loss frontiers",
               "lcsampler"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate-pool", "Simulate a pool of training outcomes");
  sim_cmd->add_option("--specs", sim.specs_path, "JSON array of curve specs (default: bundled 12 curves)")
      ->check(CLI::ExistingFile);
  sim_cmd->add_option("--volumes", sim.volumes, "Sampling volumes (default: 1%..16% of the target)")
      ->delimiter(',');
  sim_cmd->add_option("--repeats", sim.repeats, "Outcomes per (curve, volume)")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--target-volume", sim.target_volume, "Target volume x_N")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->required();
  sim_cmd->add_option("--out", sim.out, "Output pool file")->required();
  sim_cmd->add_option("--format", sim.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  IngestArgs ing;
  auto* ing_cmd = app.add_subcommand("ingest", "Validate a pool CSV and re-export it");
  ing_cmd->add_option("--pool,input", ing.in, "Pool CSV")->required()->check(CLI::ExistingFile);
  ing_cmd->add_option("--out", ing.out, "Normalized output file");
  ing_cmd->add_option("--format", ing.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Run a sampling strategy repeatedly and write its frontier");
  ev_cmd->add_option("--pool", ev.pool, "Pool CSV")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--preset", ev.presets, "Preset label (repeatable)");
  ev_cmd->add_option("--plan-json", ev.plan_json, "Plan JSON file or inline JSON object");
  ev_cmd->add_option("--label", ev.label, "Series label for --plan-json");
  ev_cmd->add_option("--k", ev.k, "k values, e.g. 1..12 or 1,3,5 (default: 1..m)");
  ev_cmd->add_option("--trials", ev.trials, "Trials per strategy")->check(CLI::PositiveNumber);
  ev_cmd->add_option("--seed", ev.seed, "Master seed")->required();
  ev_cmd->add_option("--out", ev.out, "Output frontier file")->required();
  ev_cmd->add_option("--format", ev.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  ev_cmd->add_flag("--exact-volumes", ev.exact_volumes, "Require plan volumes to exist in the pool");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a power-law learning curve to (volume, loss) points");
  fit_cmd->add_option("--points,input", fit.points, "CSV with header volume,loss")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--target-volume", fit.target_volume, "Volume to predict")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--format", fit.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  PresetsArgs pre;
  auto* pre_cmd = app.add_subcommand("presets", "List the named strategy presets");
  pre_cmd->add_option("--format", pre.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate_pool(sim, out);
    if (ing_cmd->parsed()) return cmd_ingest(ing, out);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (pre_cmd->parsed()) return cmd_presets(pre, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lcs
