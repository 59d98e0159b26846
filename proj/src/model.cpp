#include "ratings/model.hpp"

#include <cmath>

namespace ratings {

MultipleEquilibria::MultipleEquilibria(double buyer_mass, std::size_t count)
    : Error("non-discriminatory equilibrium is not unique at buyer mass " +
            std::to_string(buyer_mass) + " (" + std::to_string(count) + " found)"),
      buyer_mass_(buyer_mass),
      count_(count) {}

MarketParams validate_params(const ParamRecord& raw) {
    auto require = [](bool ok, const char* bound) {
        if (!ok) throw ViolatedBound(bound);
    };

    require(std::isfinite(raw.delta) && raw.delta > 0.0, "delta");
    require(std::isfinite(raw.alpha) && raw.alpha > 0.0 && raw.alpha <= 1.0, "alpha");
    require(std::isfinite(raw.u_high), "u_high");
    require(std::isfinite(raw.u_low) && raw.u_low >= 0.0, "u_low");
    require(std::isfinite(raw.price) && raw.price >= 0.0, "price");
    require(std::isfinite(raw.k) && raw.k > 0.0 && raw.k < 1.0, "k");
    require(std::isfinite(raw.buyer_mass) && raw.buyer_mass >= 0.0, "buyer_mass");
    require(raw.u_high > raw.u_low, "u_high>u_low");
    require(raw.u_high > raw.price, "u_high>price");

    return MarketParams{raw.delta, raw.alpha, raw.u_high, raw.u_low,
                        raw.price, raw.k,     raw.buyer_mass};
}

SteadyState SteadyState::from_array(const std::array<double, 4>& v, double seller_mass) {
    SteadyState s;
    s.p_hg = v[0];
    s.p_lg = v[1];
    s.p_hb = v[2];
    s.p_lb = v[3];
    s.seller_mass = seller_mass;
    return s;
}

const char* to_string(EquilibriumKind kind) noexcept {
    switch (kind) {
        case EquilibriumKind::NoTrade: return "no_trade";
        case EquilibriumKind::NonDiscriminatory: return "non_discriminatory";
        case EquilibriumKind::Discriminatory: return "discriminatory";
    }
    return "unknown";
}

const char* to_string(Stability s) noexcept {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::NotAssessed: return "not_assessed";
    }
    return "unknown";
}

}  // namespace ratings
