// Offline reference for the pinned level_sequence hitting probability.
//
//   hitprob_reference [n_paths=20000] [cholesky|circulant] [seed=20240]
//
// Prints hits, n_paths, p_hat and the Wilson interval. The unit tests pin the
// value this produced; rerun it whenever the generator or scheme changes.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>

#include "fcir/montecarlo.hpp"

int main(int argc, char** argv) {
    const std::size_t n_paths = argc > 1 ? std::stoul(argv[1]) : 20000;
    const auto method = fcir::parse_fbm_method(argc > 2 ? argv[2] : "cholesky");
    const std::uint64_t seed = argc > 3 ? std::stoull(argv[3]) : 20240;

    const fcir::EnsembleConfig config{
        n_paths,
        seed,
        fcir::TimeGrid::from_horizon(10.0, 1e-3),
        fcir::builtin("level_sequence", {{"k", 1.0}, {"a", 1.0}}),
        0.4,
        1.0,
        fcir::Hurst(0.3),
        method};

    const auto start = std::chrono::steady_clock::now();
    const auto hp = fcir::hitting_probability(config);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout.precision(17);
    std::cout << "method=" << fcir::to_string(method) << " seed=" << seed << " hits=" << hp.hits
              << " n_paths=" << hp.n_paths << " p_hat=" << hp.p_hat << " ci95=[" << hp.ci95.low
              << ", " << hp.ci95.high << "] seconds=" << secs << '\n';
    return EXIT_SUCCESS;
}
