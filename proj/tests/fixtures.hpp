#pragma once

#include <string>

#include "forestrot/carbon.hpp"
#include "forestrot/rotation.hpp"

namespace fixture {

enum class Species { pine, spruce };

/// Reference-species problem with the calibrated carbon profiles attached.
inline forestrot::RotationProblem problem(Species sp, double p_c, double lambda,
                                          forestrot::DamageType type = forestrot::DamageType::fire)
{
    using namespace forestrot;
    const bool pine = sp == Species::pine;
    RotationProblem p;
    p.growth = pine ? scots_pine_growth() : norway_spruce_growth();
    p.price = PriceSchedule::age_dependent();
    const auto comp = pine ? scots_pine_compartments() : norway_spruce_compartments();
    p.carbon.alpha = pine ? 1.29 : 1.36;
    if (type == DamageType::fire) p.carbon.gamma = pine ? 0.403 : 0.387;
    else p.carbon.gamma = pine ? 0.525 : 0.508;
    p.carbon.beta = pine ? 0.319 : 0.303;
    p.carbon.damage_profile = event_profile(event_of(type), comp);
    p.carbon.harvest_profile = harvest_profile(comp);
    p.econ.p_c = p_c;
    p.damage_rate = lambda;
    p.damage_type = type;
    return p;
}

inline std::string name(Species sp) { return sp == Species::pine ? "pine" : "spruce"; }

} // namespace fixture
