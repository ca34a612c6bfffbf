#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment.hpp"
#include "fairrec/rules/rule.hpp"

using namespace fairrec;
using namespace fairrec::cli;

namespace {

// name=value pairs from repeated --weight / --exponent flags.
template <typename T, typename Parse>
void apply_overrides(const std::vector<std::string>& pairs,
                     std::map<std::string, T>& out, Parse&& parse) {
  for (const std::string& p : pairs) {
    size_t eq = p.find('=');
    if (eq == std::string::npos)
      throw DataError("expected name=value, got '" + p + "'");
    out[p.substr(0, eq)] = parse(p.substr(eq + 1));
  }
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig config;

  // The config file is applied first so flags can override it.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        load_config_file(argv[i + 1], config);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
      }
    }
  }

  CLI::App app{"Hinge-loss MRF rule engine and fairness-aware movie recommender"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  std::string configPath, variantStr, normalizeStr, cosineNormStr, bodyRatingsStr,
      fairnessBodyStr;
  std::vector<std::string> weightArgs, exponentArgs;

  app.add_option("--config", configPath, "Config file (INI-style sections)");
  app.add_option("--data-dir", config.dataDir, "MovieLens-format input directory");
  app.add_option("--work-dir", config.workDir, "Output directory")
      ->envname("FAIRREC_WORKDIR");
  app.add_option("--variant", variantStr, "Model variant: mc, mc_cf, mc_cf_dc");
  app.add_flag("--fair,!--no-fair", config.fair, "Enable the fairness rules");
  app.add_option("--k", config.k, "Nearest-neighbor count");
  app.add_option("--seed", config.seed, "PRNG seed for folds and subsampling");
  app.add_option("--folds", config.folds, "Cross-validation fold count (prepare time)");
  app.add_option("--subsample", config.subsample, "Keep at most this many users");
  app.add_option("--min-ratings", config.minRatings,
                 "Keep users with strictly more ratings than this");
  app.add_option("--normalize", normalizeStr,
                 "Rating normalization, applied at prepare time: minmax or div5");
  app.add_option("--cosine-norm", cosineNormStr, "Cosine norms: corated or full");
  app.add_option("--body-ratings", bodyRatingsStr,
                 "Rating atoms in implication bodies: all or observed");
  app.add_option("--fairness-body", fairnessBodyStr,
                 "Rating atoms in fairness-rule bodies: all, observed, targets");
  app.add_option("--aggregation-weight", config.fairness.aggregationWeight,
                 "Weight of the fairness aggregation rules");
  app.add_option("--coupling-weight", config.fairness.couplingWeight,
                 "Weight of the fairness equality rules");
  app.add_flag("--mirror-aggregation,!--no-mirror-aggregation",
               config.fairness.mirrorAggregation,
               "Mirror the fairness aggregation rules (latents track group means)");
  app.add_option("--weight", weightArgs, "Rule weight override, name=value")
      ->take_all();
  app.add_option("--exponent", exponentArgs, "Rule exponent override, name=1|2")
      ->take_all();
  app.add_option("--max-iterations", config.solver.maxIterations,
                 "ADMM iteration cap");
  app.add_option("--primal-tolerance", config.solver.primalTolerance,
                 "ADMM primal tolerance");
  app.add_option("--dual-tolerance", config.solver.dualTolerance,
                 "ADMM dual tolerance");
  app.add_option("--step-size", config.solver.stepSize, "ADMM penalty rho");
  app.add_option("--threads", config.solver.threads,
                 "Solver threads (0 = hardware)");
  app.add_flag("--strict", config.strict, "Exit 3 when the solver fails to converge");

  auto* prepare = app.add_subcommand("prepare", "Parse, filter, and split the data");
  prepare->add_flag("--strict-counts", config.strictCounts,
                    "Fail unless the filtered counts match the published ones");

  auto* similarity =
      app.add_subcommand("similarity", "Build per-fold kNN similarity caches");

  int runFold = 0;
  std::string dumpPath;
  auto* run = app.add_subcommand("run", "Ground and solve one fold");
  run->add_option("--fold", runFold, "Fold index")->required();
  run->add_option("--dump-potentials", dumpPath,
                  "Write the ground potentials and solution to this file");

  auto* evaluate =
      app.add_subcommand("evaluate", "Compute metrics over all fold predictions");
  auto* cv = app.add_subcommand("cv", "Run every fold, then evaluate");

  SyntheticSpec synthSpec;
  auto* synth = app.add_subcommand(
      "synth", "Write a synthetic MovieLens-layout dataset into --data-dir");
  synth->add_option("--users", synthSpec.users, "User count");
  synth->add_option("--movies", synthSpec.movies, "Movie count");
  synth->add_option("--ratings-per-user", synthSpec.ratingsPerUser,
                    "Ratings per user (upper bound)");
  synth->add_option("--female-fraction", synthSpec.femaleFraction,
                    "Fraction of female users");
  synth->add_option("--bias", synthSpec.bias, "Gender/genre skew strength in [0,1]");
  synth->add_option("--synth-seed", synthSpec.seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // usage errors exit 1
  }

  try {
    if (!variantStr.empty()) config.variant = variant_from_name(variantStr);
    if (!normalizeStr.empty()) config.normalize = normalization_from_name(normalizeStr);
    if (!cosineNormStr.empty())
      config.cosineNorm = cosine_norm_from_name(cosineNormStr);
    if (!bodyRatingsStr.empty())
      config.bodyRatings = body_filter_from_name(bodyRatingsStr);
    if (!fairnessBodyStr.empty())
      config.fairness.fairnessBody = body_filter_from_name(fairnessBodyStr);
    apply_overrides(weightArgs, config.weights,
                    [](const std::string& s) { return std::stod(s); });
    apply_overrides(exponentArgs, config.exponents,
                    [](const std::string& s) { return std::stoi(s); });

    if (prepare->parsed()) return cmd_prepare(config);
    if (similarity->parsed()) return cmd_similarity(config);
    if (run->parsed()) return cmd_run(config, runFold, dumpPath);
    if (evaluate->parsed()) return cmd_evaluate(config);
    if (cv->parsed()) return cmd_cv(config);
    if (synth->parsed()) return cmd_synth(config, synthSpec);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
