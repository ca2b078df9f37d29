#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "relu_lab/experiments.hpp"
#include "relu_lab/io.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "INI config file")->required();
  sub->add_option("--out", args.out_dir, "output directory (overrides [output] dir)");
  sub->add_option("--seed", args.seed, "base seed (overrides experiment.seed)");
  sub->add_option("--threads", args.threads, "worker threads")->check(CLI::PositiveNumber);
}

relulab::ExperimentContext context_from(const CommonArgs& args) {
  relulab::Config cfg = relulab::Config::parse_file(args.config_path);
  std::optional<std::string> out;
  if (!args.out_dir.empty()) out = args.out_dir;
  return relulab::make_context(cfg, out, args.seed, args.threads);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"single ReLU neuron training lab"};
  app.require_subcommand(1);

  CommonArgs args;
  CLI::App* figure1 = app.add_subcommand("figure1", "excess risk vs N grid for both algorithms");
  CLI::App* traj2d = app.add_subcommand("traj2d", "2d trajectory for both algorithms");
  CLI::App* covcheck = app.add_subcommand("covcheck", "per-coordinate error recursion check");
  CLI::App* sgdfail = app.add_subcommand("sgdfail", "random-sign instance where sgd stalls");
  CLI::App* compare = app.add_subcommand("compare", "glmtron vs sgd over a small instance suite");
  CLI::App* rateslope = app.add_subcommand("rateslope", "log-log slope of excess risk vs N");
  CLI::App* misspec = app.add_subcommand("misspec", "risk plateau under label corruption");
  CLI::App* sandwich = app.add_subcommand("sandwich", "randomized excess risk sandwich scan");
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate one theorem bound as JSON");
  for (CLI::App* sub : {figure1, traj2d, covcheck, sgdfail, compare, rateslope, misspec,
                        sandwich, bounds})
    add_common(sub, args);

  CLI11_PARSE(app, argc, argv);

  try {
    relulab::ExperimentContext ctx = context_from(args);
    if (figure1->parsed()) {
      relulab::Figure1Result res = relulab::run_figure1_grid(ctx);
      for (relulab::Algorithm a : {relulab::Algorithm::GlmTron, relulab::Algorithm::Sgd}) {
        auto curve = res.curve(a);
        std::cout << relulab::to_string(a) << ": " << curve.size() << " points, "
                  << relulab::Figure1Result::inversions(curve) << " inversions\n";
      }
      std::cout << "wrote " << ctx.out_dir << "/figure1_rows.csv and figure1_summary.csv\n";
    } else if (traj2d->parsed()) {
      relulab::Traj2dResult res = relulab::run_trajectory_2d(ctx);
      for (const auto& path : res.paths)
        std::cout << relulab::to_string(path.algorithm)
                  << " final excess risk: " << relulab::fmt_double(path.final_excess_risk)
                  << "\n";
      std::cout << "wrote " << ctx.out_dir << "/traj2d_*.csv\n";
    } else if (covcheck->parsed()) {
      relulab::CovSandwichResult res = relulab::run_cov_sandwich(ctx);
      std::cout << "cells: " << res.cells.size()
                << ", fraction inside band: " << relulab::fmt_double(res.fraction_inside) << "\n";
      std::cout << "wrote " << ctx.out_dir << "/covcheck.csv\n";
    } else if (sgdfail->parsed()) {
      relulab::SgdFailureResult res = relulab::run_sgd_failure(ctx);
      std::cout << "sgd mean risk: " << relulab::fmt_double(res.sgd_mean_risk)
                << ", glmtron mean risk: " << relulab::fmt_double(res.tron_mean_risk)
                << ", risk floor: " << relulab::fmt_double(res.risk_floor) << "\n";
      std::cout << "wrote " << ctx.out_dir << "/sgdfail_rows.csv and sgdfail_summary.json\n";
    } else if (compare->parsed()) {
      relulab::TronVsSgdResult res = relulab::run_tron_vs_sgd(ctx);
      for (const auto& inst : res.instances)
        std::cout << inst.name << ": glmtron " << relulab::fmt_double(inst.tron_best) << ", sgd "
                  << relulab::fmt_double(inst.sgd_best) << ", ratio "
                  << relulab::fmt_double(inst.ratio) << "\n";
      std::cout << "wrote " << ctx.out_dir << "/compare_rows.csv and compare_summary.csv\n";
    } else if (rateslope->parsed()) {
      relulab::RateSlopeResult res = relulab::run_rate_slope(ctx);
      std::cout << "slope: " << relulab::fmt_double(res.slope) << "\n";
      std::cout << "wrote " << ctx.out_dir << "/rateslope.csv and rateslope_summary.json\n";
    } else if (misspec->parsed()) {
      relulab::MisspecPlateauResult res = relulab::run_misspecified_plateau(ctx);
      std::cout << "opt proxy (mc): " << relulab::fmt_double(res.opt_proxy_mc)
                << ", semi-analytic: " << relulab::fmt_double(res.opt_semi_analytic)
                << ", final ratio: " << relulab::fmt_double(res.final_ratio) << "\n";
      std::cout << "wrote " << ctx.out_dir << "/misspec.csv and misspec_summary.json\n";
    } else if (sandwich->parsed()) {
      relulab::SandwichScanResult res = relulab::run_sandwich_scan(ctx);
      std::cout << "holds " << res.holds << " / " << res.total << "\n";
      std::cout << "wrote " << ctx.out_dir << "/sandwich.csv\n";
    } else if (bounds->parsed()) {
      relulab::BoundReport report = relulab::run_bounds(ctx);
      std::string json = relulab::bound_report_to_json(report);
      relulab::ensure_dir(ctx.out_dir);
      relulab::write_text_file(ctx.out_dir + "/bounds.json", json);
      std::cout << json;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
