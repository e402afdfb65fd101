#pragma once

#include "mecsim/types.hpp"

namespace mecsim {

/// Shannon-capacity uplink with a power-law path-loss gain.
struct ChannelModel {
    double bandwidth_hz = 2e7;
    double pathloss_exponent = 4.0;
    double reference_gain = 1.0;  ///< gain at 1 m
};

void validate(const ChannelModel& model);

/// W * log2(1 + h g / (I + sigma^2)).
double channel_rate(const RadioParams& params, const ChannelModel& model);

/// reference_gain * d^-theta, with d clamped to at least 1 m.
double gain_from_distance(double d_m, const ChannelModel& model);

/// Converts a noise or power figure in dB (relative to 1 W) to watts.
double db_to_watts(double db);

}  // namespace mecsim
