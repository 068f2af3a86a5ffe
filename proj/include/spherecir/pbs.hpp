#ifndef SPHERECIR_PBS_HPP
#define SPHERECIR_PBS_HPP

/**
 * @file pbs.hpp
 * @brief Particle-based Brownian simulator: Gaussian stepping, interface
 *        displacement rescaling with multi-crossing handling, first-order
 *        degradation, and transparent spherical receivers.
 *
 * Each molecule takes independent Cartesian steps ~ Normal(0, 2 D dt) per
 * axis, with D taken from the layer of its current position. When a step
 * segment hits a layer interface, the remaining portion beyond the
 * intersection is scaled by sqrt(D_new / D_old) without re-randomizing the
 * direction; the rule repeats for every subsequent crossing. Degradation
 * kills a molecule after its move with probability 1 - exp(-k dt) using the
 * layer of the END position. Transparent receivers count molecules within
 * an inclusive radius and normalize by receiver volume and molecule count.
 *
 * Determinism: every particle owns an independent RNG substream derived
 * from (seed, particle index), and all per-step outputs are integer count
 * reductions, so results are identical for any worker count.
 */

#include <spherecir/medium.hpp>
#include <spherecir/util.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace spherecir {

/// Minimal 3-vector in micrometers.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double a) const { return {a * x, a * y, a * z}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

/// Spherical (r, theta, phi) to Cartesian, physics convention.
inline Vec3 spherical_to_cartesian(double r, double theta, double phi) {
    return {r * std::sin(theta) * std::cos(phi), r * std::sin(theta) * std::sin(phi),
            r * std::cos(theta)};
}

/// Simulator controls.
struct PbsConfig {
    double dt_s = 0.5;                  ///< time step [s]
    long long num_molecules = 100000;   ///< ensemble size N
    std::uint64_t seed = 1;             ///< base RNG seed
    double receiver_radius_um = 10.0;   ///< transparent receiver radius
    double duration_s = 0.0;            ///< simulated horizon from release
    /// Optional per-receiver radii; receivers beyond this list (or with a
    /// zero entry) fall back to receiver_radius_um. Far receivers need much
    /// larger counting balls than near ones for comparable statistics.
    std::vector<double> receiver_radii_um;

    /// Effective counting radius for receiver index `rcv`.
    double radius_for(std::size_t rcv) const {
        if (rcv < receiver_radii_um.size() && receiver_radii_um[rcv] > 0.0)
            return receiver_radii_um[rcv];
        return receiver_radius_um;
    }

    void validate() const {
        if (!(dt_s > 0.0)) throw std::invalid_argument("PbsConfig: dt must be positive");
        if (num_molecules < 1)
            throw std::invalid_argument("PbsConfig: at least one molecule required");
        if (!(receiver_radius_um > 0.0))
            throw std::invalid_argument("PbsConfig: receiver radius must be positive");
        for (double r : receiver_radii_um)
            if (r < 0.0)
                throw std::invalid_argument("PbsConfig: receiver radii must be >= 0");
        if (!(duration_s > 0.0))
            throw std::invalid_argument("PbsConfig: duration must be positive");
    }
};

namespace detail {

/// SplitMix64 scrambler; decorrelates consecutive particle ids into seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Independent RNG substream for one particle of one simulation seed.
inline std::mt19937_64 particle_rng(std::uint64_t seed, long long particle_index) {
    std::uint64_t s = detail::splitmix64(seed);
    s = detail::splitmix64(s ^ static_cast<std::uint64_t>(particle_index));
    return std::mt19937_64(s);
}

/// One Brownian displacement: each axis ~ Normal(0, 2 D dt).
inline Vec3 brownian_step(double d_local, double dt_s, std::mt19937_64& rng) {
    if (dt_s == 0.0) return {0.0, 0.0, 0.0};
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 * d_local * dt_s));
    double x = gauss(rng), y = gauss(rng), z = gauss(rng);
    return {x, y, z};
}

/**
 * @brief Walks a straight step segment through the layered sphere, scaling
 *        the remaining displacement by sqrt(D_new / D_old) at every
 *        interface crossing.
 *
 * Crossing points are solved in exact quadratic form; the position is
 * nudged 1e-12 um along the travel direction past each interface so the
 * same crossing is never re-detected. Throws after 64 crossings.
 */
inline Vec3 propagate_with_interfaces(const Vec3& start, const Vec3& displacement,
                                      const LayerStack& stack) {
    constexpr double kNudge = 1e-12;  // um, off-interface epsilon
    Vec3 pos = start;
    Vec3 v = displacement;
    for (int crossing = 0; crossing <= 64; ++crossing) {
        double v2 = v.norm2();
        if (v2 == 0.0) return pos;
        std::size_t region = stack.locate(pos.norm());

        // nearest parametric intersection with the region's bounding spheres
        double t_hit = 2.0;
        double r_inner = stack.region_inner_radius(region);
        double r_outer = stack.region_outer_radius(region);
        double b = 2.0 * pos.dot(v);
        for (double radius : {r_inner, r_outer}) {
            if (!(radius > 0.0) || !std::isfinite(radius)) continue;
            double c = pos.norm2() - radius * radius;
            double disc = b * b - 4.0 * v2 * c;
            if (disc < 0.0) continue;
            double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / (2.0 * v2), (-b + sq) / (2.0 * v2)}) {
                if (t > 0.0 && t <= 1.0 && t < t_hit) t_hit = t;
            }
        }
        if (t_hit > 1.0) return pos + v;

        Vec3 dir = v * (1.0 / std::sqrt(v2));
        Vec3 hit = pos + v * t_hit + dir * kNudge;
        std::size_t new_region = stack.locate(hit.norm());
        double scale = std::sqrt(stack.diffusion(new_region) / stack.diffusion(region));
        pos = hit;
        v = v * ((1.0 - t_hit) * scale);
    }
    throw std::runtime_error(
        "propagate_with_interfaces: more than 64 interface crossings in one step "
        "(time step too large for the layer geometry)");
}

/// Per-particle survival draw for one step: dies with 1 - exp(-k dt), k
/// taken from the layer of the END position.
inline bool survives_step(const Vec3& end_pos, const LayerStack& stack, double dt_s,
                          std::mt19937_64& rng) {
    double k = stack.degradation(stack.locate(end_pos.norm()));
    if (k == 0.0) return true;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    return uni(rng) >= -std::expm1(-k * dt_s);
}

/// Normalized receiver concentration: inclusive count / (volume x N_total).
inline double count_to_concentration(long long count, double radius_um,
                                     long long n_total) {
    double volume = 4.0 / 3.0 * M_PI * radius_um * radius_um * radius_um;
    return static_cast<double>(count) / (volume * static_cast<double>(n_total));
}

/// Per-step output of a full simulation run.
struct PbsSeries {
    std::vector<double> time_s;  ///< t_k = t0 + k dt, k = 0..num_steps
    /// receiver_counts[receiver][k]: alive molecules within the receiver
    std::vector<std::vector<long long>> receiver_counts;
    /// receiver_concentration[receiver][k] = counts / (volume x N)
    std::vector<std::vector<double>> receiver_concentration;
    std::vector<long long> inside_count;   ///< alive with |pos| <= outer radius
    std::vector<long long> outside_count;  ///< alive with |pos| > outer radius
    std::vector<long long> dead_count;
};

/**
 * @brief Full simulation: N molecules released at the source position at the
 *        emission time, stepped for ceil(duration / dt) steps.
 *
 * Deterministic for a fixed seed and any worker count: particles are fully
 * independent (per-particle substreams) and all outputs are integer sums.
 */
inline PbsSeries run_scenario(const LayerStack& stack, const SourceSpec& source,
                              const std::vector<ObservationPoint>& receivers,
                              const PbsConfig& config, unsigned threads = 0) {
    config.validate();
    stack.validate_source(source);
    long long n = config.num_molecules;
    std::size_t num_steps =
        static_cast<std::size_t>(std::ceil(config.duration_s / config.dt_s - 1e-9));
    if (num_steps == 0) throw std::invalid_argument("run_scenario: duration shorter than dt");
    std::size_t num_ticks = num_steps + 1;

    std::vector<Vec3> centers;
    centers.reserve(receivers.size());
    for (const ObservationPoint& rec : receivers)
        centers.push_back(spherical_to_cartesian(rec.r_um, rec.theta_rad, rec.phi_rad));
    Vec3 origin = spherical_to_cartesian(source.r_um, source.theta_rad, source.phi_rad);
    double r_body = stack.outer_radius();
    std::vector<double> recv_r2(receivers.size());
    for (std::size_t rcv = 0; rcv < receivers.size(); ++rcv)
        recv_r2[rcv] = config.radius_for(rcv) * config.radius_for(rcv);

    if (threads == 0) threads = default_thread_count();
    std::size_t blocks = std::min<std::size_t>(threads, static_cast<std::size_t>(n));

    struct BlockCounts {
        std::vector<std::vector<long long>> receiver;  // [receiver][tick]
        std::vector<long long> inside, outside, dead;
    };
    std::vector<BlockCounts> partial(blocks);
    for (BlockCounts& bc : partial) {
        bc.receiver.assign(receivers.size(), std::vector<long long>(num_ticks, 0));
        bc.inside.assign(num_ticks, 0);
        bc.outside.assign(num_ticks, 0);
        bc.dead.assign(num_ticks, 0);
    }

    auto tally = [&](BlockCounts& bc, const Vec3& pos, bool alive, std::size_t tick) {
        if (!alive) {
            ++bc.dead[tick];
            return;
        }
        if (pos.norm() <= r_body)
            ++bc.inside[tick];
        else
            ++bc.outside[tick];
        for (std::size_t rcv = 0; rcv < centers.size(); ++rcv)
            if ((pos - centers[rcv]).norm2() <= recv_r2[rcv]) ++bc.receiver[rcv][tick];
    };

    long long chunk = (n + static_cast<long long>(blocks) - 1) / static_cast<long long>(blocks);
    parallel_for(blocks, [&](std::size_t blk) {
        BlockCounts& bc = partial[blk];
        long long begin = static_cast<long long>(blk) * chunk;
        long long end = std::min(n, begin + chunk);
        for (long long pid = begin; pid < end; ++pid) {
            std::mt19937_64 rng = particle_rng(config.seed, pid);
            Vec3 pos = origin;
            bool alive = true;
            tally(bc, pos, alive, 0);
            for (std::size_t step = 1; step < num_ticks; ++step) {
                if (alive) {
                    double d_local = stack.diffusion(stack.locate(pos.norm()));
                    Vec3 disp = brownian_step(d_local, config.dt_s, rng);
                    pos = propagate_with_interfaces(pos, disp, stack);
                    alive = survives_step(pos, stack, config.dt_s, rng);
                }
                tally(bc, pos, alive, step);
            }
        }
    }, static_cast<unsigned>(blocks));

    PbsSeries out;
    out.time_s.resize(num_ticks);
    for (std::size_t k = 0; k < num_ticks; ++k)
        out.time_s[k] = source.emission_time_s + static_cast<double>(k) * config.dt_s;
    out.receiver_counts.assign(receivers.size(), std::vector<long long>(num_ticks, 0));
    out.inside_count.assign(num_ticks, 0);
    out.outside_count.assign(num_ticks, 0);
    out.dead_count.assign(num_ticks, 0);
    for (const BlockCounts& bc : partial) {
        for (std::size_t k = 0; k < num_ticks; ++k) {
            out.inside_count[k] += bc.inside[k];
            out.outside_count[k] += bc.outside[k];
            out.dead_count[k] += bc.dead[k];
        }
        for (std::size_t rcv = 0; rcv < receivers.size(); ++rcv)
            for (std::size_t k = 0; k < num_ticks; ++k)
                out.receiver_counts[rcv][k] += bc.receiver[rcv][k];
    }
    out.receiver_concentration.assign(receivers.size(), std::vector<double>(num_ticks, 0.0));
    for (std::size_t rcv = 0; rcv < receivers.size(); ++rcv)
        for (std::size_t k = 0; k < num_ticks; ++k)
            out.receiver_concentration[rcv][k] = count_to_concentration(
                out.receiver_counts[rcv][k], config.radius_for(rcv), n);
    return out;
}

}  // namespace spherecir

#endif  // SPHERECIR_PBS_HPP
