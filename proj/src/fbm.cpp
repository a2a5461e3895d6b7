#include "fcir/fbm.hpp"

#include <fftw3.h>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <string>

#include "fcir/rng.hpp"

namespace fcir {

Hurst::Hurst(double h) : h_(h) {
    if (!(h > 0.0 && h < 1.0))
        throw std::invalid_argument("Hurst index must lie in (0, 1), got " + std::to_string(h));
}

const char* to_string(FbmMethod m) noexcept {
    return m == FbmMethod::cholesky ? "cholesky" : "circulant";
}

FbmMethod parse_fbm_method(const std::string& name) {
    if (name == "cholesky") return FbmMethod::cholesky;
    if (name == "circulant") return FbmMethod::circulant;
    throw std::invalid_argument("unknown fbm method '" + name + "' (expected cholesky|circulant)");
}

FbmPath::FbmPath(TimeGrid grid, std::vector<double> values, Hurst hurst, std::uint64_t seed,
                 FbmMethod method, bool fallback)
    : grid_(grid), values_(std::move(values)), hurst_(hurst), seed_(seed), method_(method),
      fallback_(fallback) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("FbmPath: expected " + std::to_string(grid_.size()) +
                                    " values, got " + std::to_string(values_.size()));
    if (values_.front() != 0.0) throw std::invalid_argument("FbmPath: values[0] must be 0");
}

double fbm_covariance(double s, double t, Hurst h) {
    if (s < 0.0 || t < 0.0) throw std::invalid_argument("fbm_covariance: negative time");
    const double two_h = 2.0 * h.value();
    return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

// ---------------------------------------------------------------------------
// Cholesky

struct CholeskyFbm::Factor {
    Eigen::MatrixXd lower;
};

CholeskyFbm::CholeskyFbm(TimeGrid grid, Hurst h) : grid_(grid), hurst_(h) {
    const auto n = static_cast<Eigen::Index>(grid.n_steps());
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ti = grid.t(static_cast<std::size_t>(i + 1));
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = fbm_covariance(ti, grid.t(static_cast<std::size_t>(j + 1)), h);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw FactorizationError("Cholesky factorisation of the fBm covariance failed (n_steps=" +
                                 std::to_string(grid.n_steps()) +
                                 ", H=" + std::to_string(h.value()) + ")");
    Eigen::MatrixXd lower = llt.matrixL();
    if (!lower.allFinite())
        throw FactorizationError("Cholesky factor of the fBm covariance is not finite");
    factor_ = std::make_unique<Factor>(Factor{std::move(lower)});
}

CholeskyFbm::~CholeskyFbm() = default;
CholeskyFbm::CholeskyFbm(CholeskyFbm&&) noexcept = default;
CholeskyFbm& CholeskyFbm::operator=(CholeskyFbm&&) noexcept = default;

FbmPath CholeskyFbm::sample(std::uint64_t seed) const {
    const auto n = static_cast<Eigen::Index>(grid_.n_steps());
    GaussianStream rng(seed);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = rng.next_normal();
    const Eigen::VectorXd w = factor_->lower.triangularView<Eigen::Lower>() * z;
    std::vector<double> values(grid_.size());
    values[0] = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i + 1)] = w(i);
    return FbmPath(grid_, std::move(values), hurst_, seed, FbmMethod::cholesky, false);
}

// ---------------------------------------------------------------------------
// Circulant embedding

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
// One forward plan per transform size, created on demand and kept for the
// lifetime of the process. Buffers must come from fftw_malloc so they share
// the alignment of the planning arrays.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan forward(int n) {
        std::lock_guard lock(mu_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        auto* in = fftw_alloc_complex(static_cast<std::size_t>(n));
        auto* out = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_plan p = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        plans_.emplace(n, p);
        return p;
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<int, fftw_plan> plans_;
};

struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    fftw_complex* data;
    std::size_t size;
};

void forward_dft(FftwBuffer& in, FftwBuffer& out) {
    const fftw_plan p = PlanCache::instance().forward(static_cast<int>(in.size));
    fftw_execute_dft(p, in.data, out.data);
}

}  // namespace

std::vector<double> fgn_autocovariance(Hurst h, std::size_t max_lag) {
    const double two_h = 2.0 * h.value();
    std::vector<double> c(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const double kk = static_cast<double>(k);
        c[k] = 0.5 * (std::pow(kk + 1.0, two_h) - 2.0 * std::pow(kk, two_h) +
                      std::pow(std::abs(kk - 1.0), two_h));
    }
    return c;
}

std::vector<double> circulant_eigenvalues(std::span<const double> autocov) {
    if (autocov.size() < 2)
        throw std::invalid_argument("circulant_eigenvalues: need at least lags 0 and 1");
    const std::size_t n = autocov.size() - 1;
    const std::size_t m = 2 * n;
    FftwBuffer in(m), out(m);
    for (std::size_t j = 0; j < m; ++j) {
        in.data[j][0] = j <= n ? autocov[j] : autocov[m - j];
        in.data[j][1] = 0.0;
    }
    forward_dft(in, out);
    std::vector<double> eig(m);
    for (std::size_t k = 0; k < m; ++k) eig[k] = out.data[k][0];
    return eig;
}

bool embedding_admissible(std::span<const double> eigenvalues, double rel_tol) {
    if (eigenvalues.empty()) return false;
    const double max_eig = *std::max_element(eigenvalues.begin(), eigenvalues.end());
    if (!(max_eig > 0.0)) return false;
    return std::all_of(eigenvalues.begin(), eigenvalues.end(),
                       [&](double v) { return v >= -rel_tol * max_eig; });
}

CirculantFbm::CirculantFbm(TimeGrid grid, Hurst h, double rel_tol) : grid_(grid), hurst_(h) {
    const auto autocov = fgn_autocovariance(h, grid.n_steps());
    const auto eig = circulant_eigenvalues(autocov);
    if (!embedding_admissible(eig, rel_tol)) {
        fallback_ = std::make_unique<CholeskyFbm>(grid, h);
        return;
    }
    const double m = static_cast<double>(eig.size());
    sqrt_eig_.resize(eig.size());
    // Eigenvalues in [-tol, 0) are round-off around an exact zero.
    std::transform(eig.begin(), eig.end(), sqrt_eig_.begin(),
                   [m](double v) { return std::sqrt(std::max(v, 0.0) / m); });
}

CirculantFbm::~CirculantFbm() = default;
CirculantFbm::CirculantFbm(CirculantFbm&&) noexcept = default;
CirculantFbm& CirculantFbm::operator=(CirculantFbm&&) noexcept = default;

FbmPath CirculantFbm::sample(std::uint64_t seed) const {
    if (fallback_) {
        auto p = fallback_->sample(seed);
        return FbmPath(grid_, std::vector<double>(p.values().begin(), p.values().end()), hurst_,
                       seed, FbmMethod::circulant, true);
    }
    const std::size_t m = sqrt_eig_.size();
    const std::size_t n = grid_.n_steps();
    GaussianStream rng(seed);
    FftwBuffer in(m), out(m);
    for (std::size_t k = 0; k < m; ++k) {
        in.data[k][0] = sqrt_eig_[k] * rng.next_normal();
        in.data[k][1] = sqrt_eig_[k] * rng.next_normal();
    }
    forward_dft(in, out);
    // Real part of the transform is stationary noise with the fGn autocovariance.
    const double scale = std::pow(grid_.dt(), hurst_.value());
    std::vector<double> values(n + 1);
    values[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) values[i] = values[i - 1] + scale * out.data[i - 1][0];
    return FbmPath(grid_, std::move(values), hurst_, seed, FbmMethod::circulant, false);
}

// ---------------------------------------------------------------------------

FbmSampler::FbmSampler(FbmMethod method, TimeGrid grid, Hurst h) : method_(method) {
    if (method == FbmMethod::cholesky)
        cholesky_ = std::make_unique<CholeskyFbm>(grid, h);
    else
        circulant_ = std::make_unique<CirculantFbm>(grid, h);
}

FbmSampler::~FbmSampler() = default;
FbmSampler::FbmSampler(FbmSampler&&) noexcept = default;
FbmSampler& FbmSampler::operator=(FbmSampler&&) noexcept = default;

FbmPath FbmSampler::sample(std::uint64_t seed) const {
    return cholesky_ ? cholesky_->sample(seed) : circulant_->sample(seed);
}

FbmPath generate_cholesky(const TimeGrid& grid, Hurst h, std::uint64_t seed) {
    return CholeskyFbm(grid, h).sample(seed);
}

FbmPath generate_circulant(const TimeGrid& grid, Hurst h, std::uint64_t seed) {
    return CirculantFbm(grid, h).sample(seed);
}

std::vector<double> increments(const FbmPath& path) {
    const auto v = path.values();
    std::vector<double> out(v.size() - 1);
    for (std::size_t n = 1; n < v.size(); ++n) out[n - 1] = v[n] - v[n - 1];
    return out;
}

std::vector<double> cumulative_sum(std::span<const double> incs) {
    std::vector<double> out(incs.size() + 1);
    out[0] = 0.0;
    for (std::size_t n = 0; n < incs.size(); ++n) out[n + 1] = out[n] + incs[n];
    return out;
}

HolderReport empirical_holder_check(const FbmPath& path, double alpha) {
    const double h = path.hurst().value();
    if (!(alpha > 0.0 && alpha < h))
        throw std::invalid_argument("empirical_holder_check: alpha must lie in (0, H)");
    const auto& grid = path.grid();
    const std::size_t n = grid.n_steps();

    std::vector<std::size_t> idx;
    const std::size_t stride =
        n <= kHolderExhaustiveLimit ? 1 : (n + kHolderExhaustiveLimit - 1) / kHolderExhaustiveLimit;
    for (std::size_t i = 0; i <= n; i += stride) idx.push_back(i);
    if (idx.back() != n) idx.push_back(n);

    const double expo = h - alpha;
    std::vector<double> denom(n + 1, 0.0);
    for (std::size_t lag = 1; lag <= n; ++lag) denom[lag] = std::pow(grid.t(lag), expo);
    const auto w = path.values();
    HolderReport report{alpha, 0.0, {0.0, 0.0}};
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const double ratio = std::abs(w[idx[b]] - w[idx[a]]) / denom[idx[b] - idx[a]];
            if (ratio > report.max_ratio) {
                report.max_ratio = ratio;
                report.worst_pair = {grid.t(idx[a]), grid.t(idx[b])};
            }
        }
    }
    return report;
}

HolderReport empirical_holder_check(const FbmPath& path) {
    return empirical_holder_check(path, path.hurst().value() / 10.0);
}

}  // namespace fcir
