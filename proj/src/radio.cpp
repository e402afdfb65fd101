#include "mecsim/radio.hpp"

#include <algorithm>
#include <cmath>

namespace mecsim {

void validate(const ChannelModel& model)
{
    if (!(model.bandwidth_hz > 0.0) || !std::isfinite(model.bandwidth_hz)) {
        throw InvalidInput("channel: bandwidth_hz must be > 0");
    }
    if (!(model.pathloss_exponent >= 2.0)) {
        throw InvalidInput("channel: pathloss_exponent must be >= 2");
    }
    if (!(model.reference_gain > 0.0)) {
        throw InvalidInput("channel: reference_gain must be > 0");
    }
}

double channel_rate(const RadioParams& params, const ChannelModel& model)
{
    validate(model);
    if (!(params.noise_w > 0.0)) {
        throw InvalidInput("channel_rate: noise_w must be > 0");
    }
    if (!(params.tx_power_w >= 0.0) || !(params.gain >= 0.0) || !(params.interference_w >= 0.0)) {
        throw InvalidInput("channel_rate: power, gain and interference must be >= 0");
    }
    const double snr = params.tx_power_w * params.gain / (params.interference_w + params.noise_w);
    return model.bandwidth_hz * std::log2(1.0 + snr);
}

double gain_from_distance(double d_m, const ChannelModel& model)
{
    // near-field guard
    const double d = std::max(d_m, 1.0);
    return model.reference_gain * std::pow(d, -model.pathloss_exponent);
}

double db_to_watts(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace mecsim
