// Tracks a stream with a mid-run switch, then scores the learned code
// against the generating distribution.

#include <iomanip>
#include <iostream>

#include "surprise/surprise.hpp"

int main() {
  using namespace surprise;

  const std::vector<double> before{0.5, 0.2, 0.1, 0.1, 0.05, 0.03, 0.01, 0.01};
  auto after = before;
  std::swap(after.front(), after.back());

  const SourceSpec spec{ChangepointSource{LabeledDistribution::over_range(before),
                                          LabeledDistribution::over_range(after), 5000},
                        42, 10000};
  Engine engine{EngineConfig{}};
  std::optional<std::uint64_t> first_flag;
  for (const auto& o : generate(spec)) {
    const auto r = engine.step(o);
    if (r.change_flag && !first_flag && r.t >= 5000) first_flag = r.t;
  }
  std::cout << "switch at t=5000, first flag at t=" << (first_flag ? std::to_string(*first_flag) : "none")
            << '\n';

  // Learned code vs. the post-switch world.
  std::vector<SymbolId> symbols;
  std::vector<double> bits;
  for (const auto& x : engine.estimator().alphabet()) {
    symbols.push_back(x);
    bits.push_back(engine.estimator().complexity(x).value());
  }
  const auto world = LabeledDistribution::over_range(after).to_distribution();
  DivergenceOptions opts;
  opts.mind = Normalization::normalize;
  const auto report = divergences(MachinePair(world, CodeLengthTable(symbols, bits)), opts);
  std::cout << std::fixed << std::setprecision(4) << "D_wrel=" << report.D_wrel
            << " D_abs=" << report.D_abs << " D_drel=" << report.D_drel << '\n';

  // A single causal explanation.
  const BayesModel model{SymbolId("O"), {{SymbolId("M"), 0.01, 0.9}}, 0.1};
  const auto bg = from_probabilities(model);
  const auto ex = explain(bg.graph, model.observation, bg.c_d);
  std::cout << "best cause " << ex.best_cause.str() << ", U=" << ex.u.raw
            << " bits, posterior=" << std::exp2(-ex.u.raw) << '\n';
}
