#include "permstab/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "permstab/error.hpp"
#include "permstab/io.hpp"
#include "permstab/modes.hpp"
#include "permstab/preference.hpp"
#include "permstab/synth.hpp"

namespace permstab {
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

double read_logp(const Json& line, const char* key) {
  if (!line.contains(key)) throw Error(ErrorCode::MalformedInput, std::string("missing field '") + key + "'");
  const Json& v = line.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_array()) {
    std::vector<double> tokens;
    for (const Json& t : v) {
      if (!t.is_number()) throw Error(ErrorCode::MalformedInput, std::string("non-numeric entry in '") + key + "'");
      tokens.push_back(t.get<double>());
    }
    return sequence_logprob(tokens);
  }
  throw Error(ErrorCode::MalformedInput, std::string("field '") + key + "' must be a number or an array");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void emit_report(const Json& report, const std::string& out_path, std::ostream& out) {
  const std::string text = canonical_json(report) + "\n";
  if (!out_path.empty()) write_file_atomic(out_path, text);
  out << text;
}

}  // namespace

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PERMSTAB_SEED")) {
    std::uint64_t v = 0;
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec == std::errc{} && res.ptr == s.data() + s.size()) return v;
  }
  return kDefaultSeed;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Permutation-stability toolkit for retrieval-augmented generation", "permstab"};
  app.require_subcommand(1);

  RunConfig config;
  config.seed = default_seed();
  std::string out_path;
  std::function<void()> action;

  // synth
  SynthSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic bundle");
  synth->add_option("--modes", spec.true_modes, "Number of true modes")->capture_default_str();
  synth->add_option("--dim", spec.dim, "Hidden-state dimension")->capture_default_str();
  synth->add_option("--n", spec.n_states, "Number of states (permutations)")->capture_default_str();
  synth->add_option("--noise", spec.noise_std, "Noise standard deviation")->capture_default_str();
  synth->add_option("--weights", spec.size_weights, "Relative mode sizes");
  synth->add_option("--gold", spec.gold_answers, "Gold answers written to the manifest")->capture_default_str();
  synth->add_option("--seed", config.seed, "Random seed");
  synth->add_option("--out", out_path, "Bundle file to write")->required();
  synth->callback([&] {
    action = [&] {
      spec.seed = config.seed;
      const LabeledBundle lb = generate(spec);
      write_bundle(lb.bundle, out_path);
      fs::path labels = out_path;
      labels += ".labels.json";
      write_file_atomic(labels, canonical_json(Json{{"modes", spec.true_modes}, {"labels", lb.true_labels}}) + "\n");
    };
  });

  // cluster
  std::string bundle_path;
  double sigma = 0.0;
  auto* cluster = app.add_subcommand("cluster", "Cluster a bundle's hidden states into reasoning modes");
  cluster->add_option("--bundle", bundle_path, "Input bundle")->required();
  auto* sigma_opt = cluster->add_option("--sigma", sigma, "Affinity kernel width (default: data-driven)");
  cluster->add_option("--seed", config.seed, "Random seed");
  cluster->add_option("--out", out_path, "Partition JSON to write")->required();
  cluster->callback([&] {
    action = [&] {
      if (*sigma_opt) config.sigma = sigma;
      const HiddenStateBundle b = read_bundle(bundle_path);
      const ModePartition p = cluster_permutations(b, config.sigma, config.seed);
      write_file_atomic(out_path, canonical_json(partition_to_json(p)) + "\n");
    };
  });

  // represent
  std::string partition_path;
  auto* represent = app.add_subcommand("represent", "Pick one representative permutation per cluster");
  represent->add_option("--bundle", bundle_path, "Input bundle")->required();
  represent->add_option("--partition", partition_path, "Partition JSON")->required();
  represent->add_option("--out", out_path, "Representatives JSON to write")->required();
  represent->callback([&] {
    action = [&] {
      const HiddenStateBundle b = read_bundle(bundle_path);
      const ModePartition p = partition_from_json(Json::parse(read_file(partition_path)));
      write_file_atomic(out_path, canonical_json(representatives_to_json(representatives(p, b))) + "\n");
    };
  });

  // prefs
  std::string reps_path;
  bool per_representative = false;
  auto* prefs = app.add_subcommand("prefs", "Build DPO preference tuples");
  prefs->add_option("--bundle", bundle_path, "Input bundle")->required();
  prefs->add_option("--partition", partition_path, "Partition JSON")->required();
  prefs->add_option("--reps", reps_path, "Representatives JSON")->required();
  prefs->add_flag("--exhaustive", config.exhaustive, "Weight answers over all decoded permutations");
  prefs->add_flag("--per-representative", per_representative,
                  "Emit one tuple per representative ordering instead of one per query");
  prefs->add_option("--abstention", config.abstention, "Abstention target")->capture_default_str();
  prefs->add_option("--out", out_path, "Preference JSONL to write")->required();
  prefs->callback([&] {
    action = [&] {
      const HiddenStateBundle b = read_bundle(bundle_path);
      const ModePartition p = partition_from_json(Json::parse(read_file(partition_path)));
      const RepresentativeSet reps = representatives_from_json(Json::parse(read_file(reps_path)));
      AnswerProfile profile = profile_from_partition(
          p, reps, b, config.exhaustive ? ProfileMode::Exhaustive : ProfileMode::Representative);
      std::string text;
      if (per_representative) {
        for (const Representative& r : reps.clusters) {
          if (r.representative_index >= b.size()) {
            throw Error(ErrorCode::MismatchedPartition, "representative index out of range");
          }
          profile.chosen_permutation = b.permutations[r.representative_index];
          if (auto t = build_preference(profile, config.abstention)) text += canonical_json(preference_to_json(*t)) + "\n";
        }
      } else if (auto t = build_preference(profile, config.abstention)) {
        text += canonical_json(preference_to_json(*t)) + "\n";
      }
      write_file_atomic(out_path, text);
    };
  });

  // metrics
  std::string pred_path;
  std::string gold_path;
  auto* metrics = app.add_subcommand("metrics", "SubEM and token F1 of predictions against gold answers");
  metrics->add_option("--pred", pred_path, "Prediction JSONL {query_id, prediction}")->required();
  metrics->add_option("--gold", gold_path, "Gold JSONL {query_id, gold_answers}")->required();
  metrics->add_option("--out", out_path, "Also write the report here");
  metrics->callback([&] {
    action = [&] {
      std::map<std::string, std::vector<std::string>> gold;
      for (const Json& g : read_jsonl(gold_path)) {
        gold[g.at("query_id").get<std::string>()] = g.at("gold_answers").get<std::vector<std::string>>();
      }
      double subem = 0.0;
      double f1 = 0.0;
      std::size_t n = 0;
      for (const Json& p : read_jsonl(pred_path)) {
        const auto id = p.at("query_id").get<std::string>();
        const auto it = gold.find(id);
        if (it == gold.end()) throw Error(ErrorCode::MalformedInput, "no gold answers for query '" + id + "'");
        const auto prediction = p.at("prediction").get<std::string>();
        subem += sub_em(prediction, it->second);
        f1 += token_f1(prediction, it->second);
        ++n;
      }
      if (n == 0) throw Error(ErrorCode::MalformedInput, "no predictions");
      emit_report(Json{{"subem", subem / static_cast<double>(n)}, {"f1", f1 / static_cast<double>(n)}, {"n", n}},
                  out_path, out);
    };
  });

  // psr
  std::string input_path;
  std::size_t position = 0;
  auto* psr_cmd = app.add_subcommand("psr", "Perturbation success rate per gold-document position");
  psr_cmd->add_option("--input", input_path, "Outcome JSONL {gold_position, correct:[bool]}")->required();
  auto* position_opt = psr_cmd->add_option("--position", position, "Only report this 1-based position");
  psr_cmd->add_option("--out", out_path, "Also write the report here");
  psr_cmd->callback([&] {
    action = [&] {
      std::map<std::size_t, std::vector<PermutationOutcome>> by_position;
      for (const Json& line : read_jsonl(input_path)) {
        PermutationOutcome o;
        o.gold_position = line.at("gold_position").get<std::size_t>();
        o.correct = line.at("correct").get<std::vector<bool>>();
        by_position[o.gold_position].push_back(std::move(o));
      }
      auto entry = [&](std::size_t pos, const std::vector<PermutationOutcome>& outcomes) {
        std::size_t flags = 0;
        for (const auto& o : outcomes) flags += o.correct.size();
        return Json{{"position", pos}, {"psr", permstab::psr(outcomes, pos)}, {"flags", flags}};
      };
      if (*position_opt) {
        const auto it = by_position.find(position);
        if (it == by_position.end()) {
          throw Error(ErrorCode::PositionMismatch, "no outcomes at position " + std::to_string(position));
        }
        emit_report(entry(position, it->second), out_path, out);
      } else {
        Json rows = Json::array();
        for (const auto& [pos, outcomes] : by_position) rows.push_back(entry(pos, outcomes));
        emit_report(Json{{"by_position", rows}}, out_path, out);
      }
    };
  });

  // dpo-loss
  auto* dpo = app.add_subcommand("dpo-loss", "DPO loss over sequence log-probabilities");
  dpo->add_option("--input", input_path,
                  "JSONL {logp_policy_w, logp_policy_l, logp_ref_w, logp_ref_l}; numbers or token arrays")
      ->required();
  dpo->add_option("--beta", config.beta, "Preference sharpness")->capture_default_str();
  dpo->add_option("--out", out_path, "Also write the report here");
  dpo->callback([&] {
    action = [&] {
      std::vector<DpoExample> batch;
      for (const Json& line : read_jsonl(input_path)) {
        batch.push_back({read_logp(line, "logp_policy_w"), read_logp(line, "logp_policy_l"),
                         read_logp(line, "logp_ref_w"), read_logp(line, "logp_ref_l")});
      }
      const DpoReport r = dpo_loss(batch, config.beta);
      emit_report(Json{{"loss", r.loss}, {"mean_margin", r.mean_margin}}, out_path, out);
    };
  });

  // project
  std::size_t dims = 2;
  auto* project = app.add_subcommand("project", "PCA projection of a bundle's hidden states as CSV");
  project->add_option("--bundle", bundle_path, "Input bundle")->required();
  project->add_option("--dims", dims, "Number of components")->capture_default_str();
  project->add_option("--out", out_path, "CSV to write")->required();
  project->callback([&] {
    action = [&] {
      const HiddenStateBundle b = read_bundle(bundle_path);
      const DenseMatrix coords = pca_project(b.states, dims);
      std::string text = "perm_index";
      for (std::size_t c = 1; c <= dims; ++c) text += ",pc" + std::to_string(c);
      if (b.answers) text += ",answer";
      text += "\n";
      for (std::size_t i = 0; i < coords.rows(); ++i) {
        text += std::to_string(i);
        for (double v : coords.row(i)) text += "," + csv_number(v);
        if (b.answers) text += "," + csv_field((*b.answers)[i].value_or(""));
        text += "\n";
      }
      write_file_atomic(out_path, text);
    };
  });

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.emplace_back("permstab");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    std::ostringstream usage_out;
    std::ostringstream usage_err;
    const int code = app.exit(e, usage_out, usage_err);
    out << usage_out.str();
    err << usage_err.str();
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoFailure ? kExitIo : kExitValidation;
  } catch (const Json::exception& e) {
    err << "error: " << to_string(ErrorCode::MalformedInput) << ": " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace permstab
