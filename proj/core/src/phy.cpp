#include "loracell/phy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "loracell/units.hpp"

namespace loracell {

SpreadingFactor::SpreadingFactor(int m) : m_(m) {
  if (m < 7 || m > 12) {
    throw std::invalid_argument("spreading factor must be in {7..12}, got " +
                                std::to_string(m));
  }
}

std::array<SpreadingFactor, 6> SpreadingFactor::all() {
  return {SpreadingFactor(7),  SpreadingFactor(8),  SpreadingFactor(9),
          SpreadingFactor(10), SpreadingFactor(11), SpreadingFactor(12)};
}

double PhyConfig::noise_power_dbm() const {
  return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

void PhyConfig::validate() const {
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth_hz must be > 0");
  if (coding_rate < 1 || coding_rate > 4)
    throw std::invalid_argument("coding_rate must be in {1..4}");
  if (preamble_symbols < 10)
    throw std::invalid_argument("preamble_symbols must be >= 10");
  if (payload_bytes < 0) throw std::invalid_argument("payload_bytes must be >= 0");
  if (!(carrier_freq_ghz > 0))
    throw std::invalid_argument("carrier_freq_ghz must be > 0");
  if (!(path_loss_exponent > 2))
    throw std::invalid_argument("path_loss_exponent must be > 2");
  if (cell_radius < 0) throw std::invalid_argument("cell_radius must be >= 0");
  if (channel_count < 1 || channel_count > 8)
    throw std::invalid_argument("channel_count must be in {1..8}");
  if (!(duty_cycle > 0) || duty_cycle > 1)
    throw std::invalid_argument("duty_cycle must be in (0, 1]");
}

CaptureThresholds CaptureThresholds::lora_defaults() {
  CaptureThresholds t;
  t.rows = {{
      {-123.0, -6.0, -7.5},    // SF7
      {-126.0, -9.0, -9.0},    // SF8
      {-129.0, -12.0, -13.5},  // SF9
      {-132.0, -15.0, -15.0},  // SF10
      {-134.5, -17.5, -18.0},  // SF11
      {-137.0, -20.0, -22.5},  // SF12
  }};
  t.co_sf_db = 6.0;
  return t;
}

double symbol_period(SpreadingFactor sf, double bandwidth_hz) {
  return static_cast<double>(1 << sf.value()) / bandwidth_hz;
}

namespace {

// Ceiling of a/b for b > 0. Integer division truncates toward zero, which
// is already the ceiling when the quotient is negative.
int ceil_div(int a, int b) { return a > 0 ? (a + b - 1) / b : a / b; }

}  // namespace

int payload_symbols(int payload_bytes, SpreadingFactor sf, int coding_rate) {
  const int m = sf.value();
  const int ide = sf.low_data_rate_optimized() ? 1 : 0;
  const int numerator = 8 * payload_bytes - 4 * m + 44;
  const int denominator = 4 * m - 2 * ide;
  const int coded = ceil_div(numerator, denominator) * (coding_rate + 4);
  return 8 + std::max(coded, 0);
}

FrameTiming frame_airtime(int payload_bytes, SpreadingFactor sf, int coding_rate,
                          int preamble_symbols, double bandwidth_hz) {
  FrameTiming t;
  t.payload_symbols = payload_symbols(payload_bytes, sf, coding_rate);
  t.frame_symbols = preamble_symbols + t.payload_symbols;
  t.symbol_period_s = symbol_period(sf, bandwidth_hz);
  t.airtime_s = t.symbol_period_s * t.frame_symbols;
  return t;
}

FrameTiming frame_airtime(const PhyConfig& phy, SpreadingFactor sf) {
  return frame_airtime(phy.payload_bytes, sf, phy.coding_rate,
                       phy.preamble_symbols, phy.bandwidth_hz);
}

std::array<FrameTiming, kSpreadingFactorCount> frame_airtimes(const PhyConfig& phy) {
  std::array<FrameTiming, kSpreadingFactorCount> out;
  for (const auto sf : SpreadingFactor::all()) out[sf.index()] = frame_airtime(phy, sf);
  return out;
}

double max_device_rate(double airtime_s, double duty_cycle) {
  return duty_cycle / airtime_s;
}

double path_gain_constant(double carrier_freq_ghz) {
  return carrier_freq_ghz * carrier_freq_ghz * std::pow(10.0, -2.8);
}

double snr_constant(double tx_power_dbm, double carrier_freq_ghz, double noise_dbm) {
  return db_to_linear(tx_power_dbm) * path_gain_constant(carrier_freq_ghz) /
         db_to_linear(noise_dbm);
}

double snr_constant(const PhyConfig& phy) {
  return snr_constant(phy.tx_power_dbm, phy.carrier_freq_ghz, phy.noise_power_dbm());
}

}  // namespace loracell
