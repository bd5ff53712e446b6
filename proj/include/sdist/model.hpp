#pragma once

// Closed-form firm communication model. A firm picks the number of worker
// contacts n per production run to minimise
//
//     n * tau + n^(-gamma) / gamma
//
// where tau is the cost of one contact relative to the wage and gamma > 0 is
// the benefit of dividing labour. chi = gamma / (1 + gamma) is the cost share
// of communication. Contacts are continuous; nothing in this header rounds.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "sdist/error.hpp"

namespace sdist::model {

namespace detail {

inline void require_positive(double x, std::string_view what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(Errc::non_positive_argument,
                          std::string(what) + " must be a positive finite number, got " + std::to_string(x));
    }
}

}  // namespace detail

/// Communication cost share chi together with its division-of-labour
/// parameter gamma = chi / (1 - chi). chi = 0 (gamma = 0) describes a firm
/// with no communication-intensive workers and is accepted so calibrated
/// industries without such workers need no special casing.
class FirmParams {
public:
    static FirmParams from_chi(double chi) {
        if (!(chi >= 0.0 && chi < 1.0)) {
            throw DomainError(Errc::invalid_params, "chi must lie in [0, 1), got " + std::to_string(chi));
        }
        return FirmParams(chi, chi / (1.0 - chi));
    }

    static FirmParams from_gamma(double gamma) {
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
            throw DomainError(Errc::invalid_params,
                              "gamma must be finite and non-negative, got " + std::to_string(gamma));
        }
        return FirmParams(gamma / (1.0 + gamma), gamma);
    }

    [[nodiscard]] double chi() const noexcept { return chi_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }

    friend bool operator==(const FirmParams&, const FirmParams&) = default;

private:
    FirmParams(double chi, double gamma) : chi_(chi), gamma_(gamma) {}

    double chi_;
    double gamma_;
};

/// A cap on face-to-face contacts, optionally with telecommunication available
/// at a fixed cost per contact.
struct Intervention {
    double contact_cap;
    std::optional<double> telecom_cost;

    explicit Intervention(double cap, std::optional<double> telecom = std::nullopt)
        : contact_cap(cap), telecom_cost(telecom) {
        detail::require_positive(contact_cap, "contact cap");
        if (telecom_cost) detail::require_positive(*telecom_cost, "telecom cost");
    }
};

/// Cost-minimising contacts, tau^(-1/(1+gamma)).
inline double optimal_contacts(double tau, const FirmParams& params) {
    detail::require_positive(tau, "tau");
    return std::pow(tau, -1.0 / (1.0 + params.gamma()));
}

/// Minimised unit cost tau^chi / chi. Undefined for chi = 0.
inline double unit_cost(double tau, const FirmParams& params) {
    detail::require_positive(tau, "tau");
    if (params.chi() <= 0.0) {
        throw DomainError(Errc::invalid_params, "unit cost requires chi > 0");
    }
    return std::pow(tau, params.chi()) / params.chi();
}

/// Optimal contacts when the contact cost is d^(-eps): d^(eps (1 - chi)).
inline double contacts_at_density(double d, double eps, const FirmParams& params) {
    detail::require_positive(d, "density");
    detail::require_positive(eps, "eps");
    return std::pow(d, eps * (1.0 - params.chi()));
}

/// Unit cost at density d: d^(-eps chi) / chi. Strictly decreasing in d.
inline double unit_cost_at_density(double d, double eps, const FirmParams& params) {
    detail::require_positive(d, "density");
    detail::require_positive(eps, "eps");
    if (params.chi() <= 0.0) {
        throw DomainError(Errc::invalid_params, "unit cost requires chi > 0");
    }
    return std::pow(d, -eps * params.chi()) / params.chi();
}

/// Cost under a contact cap relative to the optimum, as a function of
/// cap_ratio = N / n*. Returns exactly 1 when the cap does not bind.
inline double distancing_cost_ratio(double cap_ratio, const FirmParams& params) {
    detail::require_positive(cap_ratio, "cap ratio");
    if (cap_ratio >= 1.0) return 1.0;
    const double chi = params.chi();
    return chi * cap_ratio + (1.0 - chi) * std::pow(cap_ratio, -params.gamma());
}

/// Cost when all contacts move to telecommunication at cost T per contact,
/// relative to the face-to-face optimum: (T d^eps)^chi.
///
/// The derivation needs telecom to be no cheaper than a face-to-face contact,
/// T >= d^(-eps); below that the firm would already be using telecom. The
/// bound is sometimes quoted as T > d^eps, which contradicts the face-to-face
/// cost d^(-eps); this function gates on T >= d^(-eps).
inline double telecom_cost_ratio(double telecom_cost, double d, double eps, const FirmParams& params) {
    detail::require_positive(telecom_cost, "telecom cost");
    detail::require_positive(d, "density");
    detail::require_positive(eps, "eps");
    const double face_to_face = std::pow(d, -eps);
    if (telecom_cost < face_to_face) {
        throw DomainError(Errc::telecom_below_face_to_face,
                          "telecom cost " + std::to_string(telecom_cost) +
                              " is below the face-to-face contact cost " + std::to_string(face_to_face));
    }
    return std::pow(telecom_cost * std::pow(d, eps), params.chi());
}

enum class Regime { unconstrained, distanced, telecom };

inline std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::unconstrained: return "unconstrained";
        case Regime::distanced: return "distanced";
        case Regime::telecom: return "telecom";
    }
    return "unknown";
}

struct RegimeChoice {
    Regime regime;
    double cost_ratio;
};

/// Cheapest response to an intervention. Telecom is only an option where it
/// is at least as expensive per contact as face-to-face (see
/// telecom_cost_ratio); ties go to keeping face-to-face contacts.
inline RegimeChoice preferred_regime(const Intervention& intervention, double d, double eps,
                                     const FirmParams& params) {
    const double nstar = contacts_at_density(d, eps, params);
    if (nstar <= intervention.contact_cap) return {Regime::unconstrained, 1.0};

    const double distanced = distancing_cost_ratio(intervention.contact_cap / nstar, params);
    if (intervention.telecom_cost && *intervention.telecom_cost >= std::pow(d, -eps)) {
        const double telecom = telecom_cost_ratio(*intervention.telecom_cost, d, eps, params);
        if (telecom < distanced) return {Regime::telecom, telecom};
    }
    return {Regime::distanced, distanced};
}

/// 1 - lambda, the share of the wage the firm still pays. For large gamma
/// lambda rounds to 1 in double while this stays positive.
inline double retained_wage_share(double cap_ratio, const FirmParams& params) {
    detail::require_positive(cap_ratio, "cap ratio");
    if (cap_ratio >= 1.0) return 1.0;
    const double chi = params.chi();
    const double denom = 1.0 - chi * cap_ratio;
    if (!(denom > 0.0)) {
        throw DomainError(Errc::subsidy_out_of_range, "chi * cap ratio must be below 1");
    }
    return (1.0 - chi) / denom * std::pow(cap_ratio, params.gamma());
}

/// Proportional wage subsidy that offsets a binding contact cap:
///
///     1 - (1 - chi) / (1 - chi x) * x^gamma,   x = N / n*
///
/// Zero when the cap does not bind, tends to 1 as x -> 0 and rises with chi.
inline double compensating_subsidy(double cap_ratio, const FirmParams& params) {
    return 1.0 - retained_wage_share(cap_ratio, params);
}

}  // namespace sdist::model
