#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "softguide/asymptotics.hpp"
#include "softguide/bs_core.hpp"
#include "softguide/config.hpp"
#include "softguide/errors.hpp"
#include "softguide/harness.hpp"
#include "softguide/well1d.hpp"

using namespace softguide;
using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

harness::RunConfig configure(const std::string& path, const std::vector<std::string>& sets) {
  auto kv = path.empty() ? harness::KeyValues::parse("", "<command line>") : harness::KeyValues::load(path);
  for (const auto& s : sets) kv.set(s);
  return harness::load_config(kv);
}

json record_json(const harness::SweepRecord& r) {
  return json{{"epsilon", r.epsilon},       {"status", r.status},
              {"message", r.message},       {"mu1", num(r.mu1)},
              {"lambda1_pred", num(r.lambda1_pred)}, {"delta_hat", num(r.delta_hat)},
              {"delta_bs_leading", num(r.delta_bs_leading)}, {"delta_bs_full", num(r.delta_bs_full)},
              {"lambda1_bs_full", num(r.lambda1_bs_full)}, {"mu1_fd", num(r.mu1_fd)},
              {"lambda1_fd", num(r.lambda1_fd)}, {"truncation", num(r.truncation)},
              {"count_below", r.count_below}, {"overlap", num(r.overlap)},
              {"h", num(r.h)}, {"h_final", num(r.h_final)}, {"L", num(r.L)},
              {"seconds", r.t_total}};
}

int run_rows(harness::RunConfig c, std::set<harness::Mode> modes, const std::string& dump) {
  if (c.epsilons.empty()) throw harness::ConfigError("empty epsilon list", "sweep.epsilons");
  c.modes = std::move(modes);
  auto ctx = harness::make_context(c);
  ctx.dump_eigenvector = dump;
  json out = json::array();
  int failed = 0;
  for (double e : c.epsilons) {
    const auto r = harness::run_epsilon(c, ctx, e);
    if (!r.ok()) ++failed;
    out.push_back(record_json(r));
  }
  std::cout << out.dump(2) << "\n";
  return failed == static_cast<int>(c.epsilons.size()) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softguide: weakly deformed soft quantum waveguides"};
  app.require_subcommand(1);

  double alpha = 4.0, d = 1.0;
  auto* well = app.add_subcommand("well", "bound states of the transverse square well");
  well->add_option("--alpha", alpha, "well depth")->required();
  well->add_option("--d", d, "well width")->required();

  std::string config_path, dump;
  std::vector<std::string> sets;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file")->required();
    sub->add_option("--set", sets, "override, key=value")->take_all();
  };
  auto* predict = app.add_subcommand("predict", "asymptotic predictions per epsilon");
  auto* critical = app.add_subcommand("critical", "critical-case check and trial energies");
  auto* dirichlet = app.add_subcommand("compare-dirichlet", "large-alpha comparison with the Dirichlet guide");
  auto* fdsolve = app.add_subcommand("fd-solve", "finite-difference ground state per epsilon");
  auto* bssolve = app.add_subcommand("bs-solve", "secular-equation roots per epsilon");
  auto* sweep = app.add_subcommand("sweep", "configured sweep with results.csv, results.json and plots");
  for (auto* s : {predict, critical, dirichlet, fdsolve, bssolve, sweep}) with_config(s);
  for (auto* s : {fdsolve, sweep}) s->add_option("--dump-eigenvector", dump, "eigenvector CSV path prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*well) {
      const auto w = well1d::solve_well({alpha, d});
      json modes = json::array();
      for (const auto& m : w.modes)
        modes.push_back({{"index", m.index},
                         {"mu", m.mu},
                         {"parity", m.parity == well1d::Parity::Even ? "even" : "odd"},
                         {"k", m.k_in},
                         {"kappa", m.kappa},
                         {"edge_value", m.edge_value()}});
      std::cout << json{{"alpha", alpha}, {"d", d}, {"count", w.count()}, {"mu1", w.mu1()}, {"v1_d", w.v1_d()},
                        {"modes", modes}}
                       .dump(2)
                << "\n";
      return 0;
    }
    const auto c = configure(config_path, sets);
    if (*predict) {
      const auto ctx = harness::make_context(c);
      const auto& p = ctx.prediction;
      json rows = json::array();
      for (double e : c.epsilons) {
        json r{{"epsilon", e}, {"lambda1", nullptr}, {"delta_hat", nullptr}};
        if (p.classification == asymptotics::Classification::UniqueBoundState) {
          r["lambda1"] = p.lambda1_at(e);
          r["delta_hat"] = e * p.delta_hat_slope;
        }
        rows.push_back(r);
      }
      std::cout << json{{"mu1", p.mu1},
                        {"v1_d", p.v1_d},
                        {"classification", asymptotics::to_string(p.classification)},
                        {"lambda1_eps2_coeff", p.lambda1_eps2_coeff},
                        {"delta_hat_slope", p.delta_hat_slope},
                        {"u_norm_leading", p.u_norm_leading ? json(*p.u_norm_leading) : json(nullptr)},
                        {"dirichlet_eps2_coeff", p.dirichlet_eps2_coeff},
                        {"rows", rows}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*critical) {
      const auto ctx = harness::make_context(c);
      const auto cc = asymptotics::critical_check(ctx.well, ctx.profile);
      const double lam = c.trial_lambda.value_or(asymptotics::optimal_lambda(ctx.well));
      json rows = json::array();
      for (double e : c.epsilons) {
        const auto te = asymptotics::trial_energy(ctx.well, ctx.profile, lam, e, c.trial_cutoff_scale);
        rows.push_back({{"epsilon", e}, {"J", te.J_exact}, {"J_eps2_coeff", te.J_quadratic_coeff},
                        {"cutoff_scale", te.cutoff_scale}, {"quad_error", te.quad_error}});
      }
      std::cout << json{{"ratio", cc.ratio},    {"threshold", cc.threshold}, {"satisfied", cc.satisfied},
                        {"verdict", cc.verdict}, {"lambda", lam},            {"rows", rows}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (*dirichlet) {
      harness::compare_dirichlet(c, &std::cout);
      return 0;
    }
    if (*fdsolve) return run_rows(c, {harness::Mode::Predict, harness::Mode::Fd}, dump);
    if (*bssolve) return run_rows(c, {harness::Mode::Predict, harness::Mode::BsLeading, harness::Mode::BsFull}, {});
    if (*sweep) {
      const auto res = harness::sweep(c, &std::cerr, dump);
      std::cout << "wrote " << res.rows.size() << " row(s) to " << c.out_dir << " (ran " << res.ran << ", skipped "
                << res.skipped << ", failed " << res.failed << ")\n";
      return res.exit_code;
    }
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
