#ifndef SPHERECIR_MEDIUM_HPP
#define SPHERECIR_MEDIUM_HPP

/**
 * @file medium.hpp
 * @brief Layered spherical geometry and porous-medium transport parameters.
 *
 * A LayerStack describes N_L concentric finite layers surrounded by an
 * infinite exterior region. Each layer i has porosity eps_i, tortuosity
 * tau_i = eps_i^(-1/2), and effective diffusion coefficient
 *
 *   D_i = (eps_i / tau_i) * D = eps_i^(3/2) * D,
 *
 * where D is the free-fluid diffusion coefficient. At each interface a
 * fully permeable boundary imposes flux continuity together with a
 * concentration jump of ratio kappa_i = sqrt(D_{i+1} / D_i).
 *
 * Canonical units throughout the library: micrometers, seconds, um^2/s.
 */

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace spherecir {

/// One layer of the stack. The exterior region is described separately.
struct Layer {
    double width_um = 0.0;          ///< radial extent [um]
    double porosity = 1.0;          ///< extracellular volume fraction, (0, 1]
    double degradation_rate = 0.0;  ///< first-order loss rate k [1/s]
};

/// Impulsive point source in spherical coordinates.
struct SourceSpec {
    double r_um = 0.0;
    double theta_rad = 0.0;
    double phi_rad = 0.0;
    double emission_time_s = 0.0;
    long long molecule_count = 1;  ///< used by the particle simulator only
};

/// Observation point in spherical coordinates.
struct ObservationPoint {
    double r_um = 0.0;
    double theta_rad = 0.0;
    double phi_rad = 0.0;
};

/// Effective diffusion coefficient D_i = porosity^(3/2) * D.
inline double effective_diffusion(double porosity, double free_diffusion) {
    if (!(porosity > 0.0) || porosity > 1.0)
        throw std::domain_error("effective_diffusion: porosity must be in (0, 1]");
    if (!(free_diffusion > 0.0))
        throw std::domain_error("effective_diffusion: free diffusion must be positive");
    return free_diffusion * porosity * std::sqrt(porosity);
}

/// Concentration jump constant kappa = sqrt(D_outer / D_inner) at an interface.
inline double jump_constant(double d_inner, double d_outer) {
    if (!(d_inner > 0.0) || !(d_outer > 0.0))
        throw std::domain_error("jump_constant: diffusivities must be positive");
    return std::sqrt(d_outer / d_inner);
}

/**
 * @brief Concentric layered sphere immersed in an infinite fluid.
 *
 * Regions are indexed 0..N_L: indices 0..N_L-1 are the finite layers,
 * index N_L is the unbounded exterior. Immutable after construction.
 */
class LayerStack {
public:
    /// Exterior defaults to free fluid (porosity 1, no degradation).
    LayerStack(std::vector<Layer> finite_layers, double free_diffusion_um2s,
               double exterior_porosity = 1.0, double exterior_degradation = 0.0)
        : layers_(std::move(finite_layers)), free_diffusion_(free_diffusion_um2s) {
        if (layers_.empty())
            throw std::invalid_argument("LayerStack: at least one finite layer required");
        if (!(free_diffusion_ > 0.0))
            throw std::invalid_argument("LayerStack: free diffusion must be positive");
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const Layer& l = layers_[i];
            if (!(l.width_um > 0.0) || !std::isfinite(l.width_um))
                throw std::invalid_argument("LayerStack: layer " + std::to_string(i) +
                                            " width must be positive and finite");
            if (!(l.porosity > 0.0) || l.porosity > 1.0)
                throw std::invalid_argument("LayerStack: layer " + std::to_string(i) +
                                            " porosity must be in (0, 1]");
            if (l.degradation_rate < 0.0)
                throw std::invalid_argument("LayerStack: layer " + std::to_string(i) +
                                            " degradation rate must be >= 0");
        }
        if (!(exterior_porosity > 0.0) || exterior_porosity > 1.0)
            throw std::invalid_argument("LayerStack: exterior porosity must be in (0, 1]");
        if (exterior_degradation < 0.0)
            throw std::invalid_argument("LayerStack: exterior degradation rate must be >= 0");

        radii_.resize(layers_.size() + 1, 0.0);
        for (std::size_t i = 0; i < layers_.size(); ++i)
            radii_[i + 1] = radii_[i] + layers_[i].width_um;

        porosity_.reserve(layers_.size() + 1);
        degradation_.reserve(layers_.size() + 1);
        for (const Layer& l : layers_) {
            porosity_.push_back(l.porosity);
            degradation_.push_back(l.degradation_rate);
        }
        porosity_.push_back(exterior_porosity);
        degradation_.push_back(exterior_degradation);

        diffusion_.reserve(porosity_.size());
        for (double eps : porosity_)
            diffusion_.push_back(effective_diffusion(eps, free_diffusion_));
    }

    std::size_t num_finite_layers() const { return layers_.size(); }
    std::size_t num_regions() const { return layers_.size() + 1; }

    double free_diffusion() const { return free_diffusion_; }
    double outer_radius() const { return radii_.back(); }

    /// Interface radius R_i between regions i-1 and i, i in [1, N_L].
    double interface_radius(std::size_t i) const { return radii_.at(i); }

    double region_inner_radius(std::size_t region) const { return radii_.at(region); }
    double region_outer_radius(std::size_t region) const {
        return region + 1 < radii_.size() ? radii_[region + 1]
                                          : std::numeric_limits<double>::infinity();
    }

    double porosity(std::size_t region) const { return porosity_.at(region); }
    double tortuosity(std::size_t region) const { return 1.0 / std::sqrt(porosity_.at(region)); }
    double diffusion(std::size_t region) const { return diffusion_.at(region); }
    double degradation(std::size_t region) const { return degradation_.at(region); }

    /// kappa at the interface between regions `interface` - 1 and `interface`,
    /// with `interface` in [1, N_L] (i.e. at radius R_interface).
    double jump(std::size_t interface) const {
        if (interface < 1 || interface >= num_regions())
            throw std::out_of_range("LayerStack::jump: interface index");
        return jump_constant(diffusion_[interface - 1], diffusion_[interface]);
    }

    /**
     * @brief Region index containing radius r.
     *
     * A point exactly on an interface is assigned to the outer region; the
     * choice has measure zero but is fixed for reproducibility.
     */
    std::size_t locate(double r) const {
        if (r < 0.0) throw std::domain_error("LayerStack::locate: r must be >= 0");
        std::size_t region = 0;
        while (region < layers_.size() && r >= radii_[region + 1]) ++region;
        return region;
    }

    /// True if r lies exactly on a finite interface radius.
    bool on_interface(double r) const {
        for (std::size_t i = 1; i < radii_.size(); ++i)
            if (r == radii_[i]) return true;
        return false;
    }

    /// Rejects sources placed exactly on an interface; the analytic solution
    /// requires the source strictly interior to a region.
    void validate_source(const SourceSpec& src) const {
        if (src.r_um < 0.0)
            throw std::invalid_argument("source: r must be >= 0");
        if (on_interface(src.r_um))
            throw std::invalid_argument("source: position coincides with an interface radius");
        if (src.theta_rad < 0.0 || src.theta_rad > 3.14159265358979323846 + 1e-12)
            throw std::invalid_argument("source: theta must be in [0, pi]");
        if (src.molecule_count < 1)
            throw std::invalid_argument("source: molecule count must be >= 1");
    }

private:
    std::vector<Layer> layers_;
    double free_diffusion_;
    std::vector<double> radii_;        // R_0 = 0 .. R_{N_L}
    std::vector<double> porosity_;     // per region, incl. exterior
    std::vector<double> degradation_;  // per region
    std::vector<double> diffusion_;    // per region
};

/// Unit conversion for CLI ingestion; internal unit is um^2/s.
inline double cm2_per_s_to_um2_per_s(double d_cm2s) { return d_cm2s * 1.0e8; }

}  // namespace spherecir

#endif  // SPHERECIR_MEDIUM_HPP
