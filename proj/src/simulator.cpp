#include "infers/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "infers/error.hpp"

namespace infers {

namespace {

void require(bool ok, const std::string& field, const std::string& what)
{
    if (!ok) throw Error(ErrorCode::InvalidArgument, field + ": " + what);
}

// Zero-mean draw with the requested variance.
class ErrorSampler {
public:
    explicit ErrorSampler(double dof) : dof_(dof), student_(dof > 0.0 ? dof : 1.0)
    {
        if (dof_ > 0.0) unit_scale_ = std::sqrt((dof_ - 2.0) / dof_);
    }

    double operator()(std::mt19937_64& gen, double variance)
    {
        if (variance == 0.0) return 0.0;
        const double sd = std::sqrt(variance);
        if (dof_ > 0.0) return sd * unit_scale_ * student_(gen);
        return sd * normal_(gen);
    }

private:
    double dof_;
    double unit_scale_ = 1.0;
    std::normal_distribution<double> normal_;
    std::student_t_distribution<double> student_;
};

void generate_chunk(const SimulationConfig& cfg, std::size_t chunk, std::span<CollocationRecord> out)
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
    std::mt19937_64 gen(seq);
    ErrorSampler truth_sampler(0.0);
    ErrorSampler err_sampler(cfg.error_dof);

    const auto b = [&](Tag t) { return cfg.beta[index(t)]; };
    const auto l = [&](Tag t) { return cfg.lambda[index(t)]; };
    const auto a = [&](Tag t) { return cfg.alpha[index(t)]; };

    const std::size_t first = chunk * cfg.chunk_size;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double tu = truth_sampler(gen, cfg.sigma_t2_u);
        const double tv = truth_sampler(gen, cfg.sigma_t2_v);
        const Velocity t(tu, tv);
        std::array<Velocity, kTagCount> e{};
        for (std::size_t j = 0; j < kTagCount; ++j) {
            const double eu = err_sampler(gen, cfg.sigma2_u[j]);
            const double ev = err_sampler(gen, cfg.sigma2_v[j]);
            e[j] = Velocity(eu, ev);
        }
        const auto eps = [&](Tag tag) { return e[index(tag)]; };

        const Velocity err_n = l(Tag::N) * eps(Tag::I) + eps(Tag::N);
        const Velocity err_f = l(Tag::F) * err_n + eps(Tag::F);
        const Velocity err_e = l(Tag::E) * err_f + eps(Tag::E);
        const Velocity err_r = l(Tag::R) * err_n + eps(Tag::R);
        const Velocity err_s = l(Tag::S) * err_r + eps(Tag::S);

        CollocationRecord& r = out[k];
        r.time = cfg.start_time + static_cast<std::int64_t>(first + k) * cfg.time_step;
        r.lat = cfg.lat;
        r.lon = cfg.lon;
        r[Tag::I] = t + eps(Tag::I);
        r[Tag::N] = a(Tag::N) + b(Tag::N) * t + err_n;
        r[Tag::F] = a(Tag::F) + b(Tag::F) * t + err_f;
        r[Tag::E] = a(Tag::E) + b(Tag::E) * t + err_e;
        r[Tag::R] = a(Tag::R) + b(Tag::R) * t + err_r;
        r[Tag::S] = a(Tag::S) + b(Tag::S) * t + err_s;
    }
}

}  // namespace

void validate(const SimulationConfig& cfg)
{
    require(cfg.n >= 1, "n", "must be at least 1");
    require(cfg.chunk_size >= 1, "chunk_size", "must be at least 1");
    require(std::isfinite(cfg.sigma_t2_u) && cfg.sigma_t2_u >= 0.0, "sigma_t2_u", "must be a non-negative variance");
    require(std::isfinite(cfg.sigma_t2_v) && cfg.sigma_t2_v >= 0.0, "sigma_t2_v", "must be a non-negative variance");
    for (Tag t : kAllTags) {
        const std::string name(tag_name(t));
        const std::size_t j = index(t);
        require(std::isfinite(cfg.sigma2_u[j]) && cfg.sigma2_u[j] >= 0.0, "sigma2." + name + "[u]",
                "must be a non-negative variance");
        require(std::isfinite(cfg.sigma2_v[j]) && cfg.sigma2_v[j] >= 0.0, "sigma2." + name + "[v]",
                "must be a non-negative variance");
        require(std::isfinite(cfg.beta[j]), "beta." + name, "must be finite");
        require(std::isfinite(cfg.lambda[j]), "lambda." + name, "must be finite");
        require(std::isfinite(cfg.alpha[j].real()) && std::isfinite(cfg.alpha[j].imag()), "alpha." + name,
                "must be finite");
    }
    require(cfg.error_dof == 0.0 || cfg.error_dof > 2.0, "error_dof", "must be 0 (Gaussian) or greater than 2");
    require(cfg.lat >= -90.0 && cfg.lat <= 90.0, "lat", "must lie in [-90, 90]");
    require(cfg.lon >= -180.0 && cfg.lon < 360.0, "lon", "must lie in [-180, 360)");
}

InfersParams to_params(const SimulationConfig& cfg)
{
    InfersParams p;
    p.sigma_t2_u = cfg.sigma_t2_u;
    p.sigma_t2_v = cfg.sigma_t2_v;
    p.sigma_t2 = cfg.sigma_t2_u + cfg.sigma_t2_v;
    p.alpha = cfg.alpha;
    p.alpha[index(Tag::I)] = Velocity{};
    p.beta = cfg.beta;
    p.beta[index(Tag::I)] = 1.0;
    p.lambda = cfg.lambda;
    p.lambda[index(Tag::I)] = 0.0;
    for (std::size_t j = 0; j < kTagCount; ++j) p.sigma2[j] = cfg.sigma2_u[j] + cfg.sigma2_v[j];
    return p;
}

std::vector<CollocationRecord> simulate(const SimulationConfig& cfg, unsigned workers)
{
    validate(cfg);
    std::vector<CollocationRecord> out(cfg.n);
    const std::size_t chunks = (cfg.n + cfg.chunk_size - 1) / cfg.chunk_size;
    const auto run = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t c = worker; c < chunks; c += stride) {
            const std::size_t begin = c * cfg.chunk_size;
            const std::size_t end = std::min(cfg.n, begin + cfg.chunk_size);
            generate_chunk(cfg, c, std::span<CollocationRecord>(out).subspan(begin, end - begin));
        }
    };
    workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, chunks));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
    }
    return out;
}

MomentSet population_moments(const SimulationConfig& cfg)
{
    InfersParams p = to_params(cfg);
    MomentSet m;
    m.n = 0;
    m.cov_u = model_covariance(cfg.sigma_t2_u, p.beta, p.lambda, cfg.sigma2_u);
    m.cov_v = model_covariance(cfg.sigma_t2_v, p.beta, p.lambda, cfg.sigma2_v);
    m.cov_joint = m.cov_u + m.cov_v;
    m.mean = p.alpha;
    return m;
}

std::string rng_identity() { return "std::mt19937_64/seed_seq(seed_lo,seed_hi,chunk_lo,chunk_hi)/libstdc++ normal_distribution"; }

}  // namespace infers
