// neurotopo: command-line front end.
//
//   neurotopo parse    --input DIR|FILE... --out DIR
//   neurotopo analyze  --input DIR|FILE... --out DIR
//   neurotopo fit      --input DIR... --out DIR
//   neurotopo generate --model inhomogeneous --a A --b B --c C --n N --seed S --out DIR
//   neurotopo compare  --real DIR --virtual DIR --out DIR
//   neurotopo shuffle  --input DIR --group-size 7 --shuffles 1000 --seed S --out DIR
//
// Exit codes: 0 success, 1 analysis error, 2 usage or input error.

#include <iostream>

#include <CLI11.hpp>

#include "neurotopo/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace neurotopo;
  RunConfig config;
  CLI::App app{"Neuron tree topology: SWC ingestion, morphometrics, branching-model fits and virtual trees"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", config.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", config.seed, "64-bit random seed")->capture_default_str();
  };

  auto* parse = app.add_subcommand("parse", "SWC files to canonical tree JSON");
  parse->add_option("--input", config.inputs, "SWC files or directories")->required();
  parse->add_flag("--largest-component", config.largest_component,
                  "Keep the largest connected component when a file has several roots");
  add_common(parse);

  auto* analyze = app.add_subcommand("analyze", "Morphometrics of tree JSON files");
  analyze->add_option("--input", config.inputs, "Tree JSON files or directories")->required();
  add_common(analyze);

  auto* fit = app.add_subcommand("fit", "Branching-frequency, scaling and length fits");
  fit->add_option("--input", config.inputs, "Directories holding metrics.csv and profiles.csv")->required();
  fit->add_option("--min-samples", config.min_samples, "Orders need more nodes than this to enter fits")
      ->capture_default_str();
  fit->add_flag("--weighted", config.weighted_fit, "Weight decay-fit residuals by per-order sample size");
  fit->add_flag("--per-tree", config.per_tree_frequencies, "Average per-tree frequencies instead of pooling");
  fit->add_flag("--pooled-t", config.pooled_t, "Pooled-variance instead of Welch two-sample t-test");
  add_common(fit);

  auto* generate = app.add_subcommand("generate", "Virtual trees from a branching model");
  generate->add_option("--model", config.model, "homogeneous or inhomogeneous")
      ->check(CLI::IsMember({"homogeneous", "inhomogeneous"}))
      ->capture_default_str();
  generate->add_option("--p", config.p, "Homogeneous branching probability");
  generate->add_option("--a", config.a, "Decay rate");
  generate->add_option("--b", config.b, "Amplitude");
  generate->add_option("--c", config.c, "Plateau probability");
  generate->add_option("--n", config.n, "Number of trees")->capture_default_str();
  generate->add_option("--kind", config.kind, "Label for generated trees (axon or dendrite)")->capture_default_str();
  generate->add_option("--max-order", config.max_order, "Order cap; exceeding it is an error")->capture_default_str();
  generate->add_option("--format", config.format, "json: tree documents; csv: metrics and profiles")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  generate->add_option("--threads", config.threads, "Worker threads (output does not depend on it)")
      ->capture_default_str();
  generate->add_flag("--allow-supercritical", config.allow_supercritical,
                     "Permit limiting probability >= 1/2 (trees hitting the caps fail)");
  add_common(generate);

  auto* compare = app.add_subcommand("compare", "Real vs virtual populations");
  compare->add_option("--real", config.real_inputs, "Metrics of reconstructed trees")->required();
  compare->add_option("--virtual", config.virtual_inputs, "Metrics of virtual trees")->required();
  compare->add_option("--format", config.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  add_common(compare);

  auto* shuffle = app.add_subcommand("shuffle", "Dendrite-size shuffling test");
  shuffle->add_option("--input", config.inputs, "Metrics tables or directories")->required();
  shuffle->add_option("--group-size", config.group_size, "Dendrites per neuron")->capture_default_str();
  shuffle->add_option("--shuffles", config.shuffles, "Number of random shuffles")->capture_default_str();
  add_common(shuffle);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*parse) cmd_parse(config, std::cout);
    if (*analyze) cmd_analyze(config, std::cout);
    if (*fit) cmd_fit(config, std::cout);
    if (*generate) cmd_generate(config, std::cout);
    if (*compare) cmd_compare(config, std::cout);
    if (*shuffle) cmd_shuffle(config, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
