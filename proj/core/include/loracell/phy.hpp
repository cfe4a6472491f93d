#pragma once

#include <array>
#include <compare>
#include <cstdint>

// Deterministic LoRa PHY arithmetic: symbol/frame timing, capture
// thresholds and the link-budget constant. Everything in this header is a
// pure function of its inputs and safe to call concurrently.

namespace loracell {

/// LoRa spreading factor, m in {7..12}. Construction validates the range.
class SpreadingFactor {
 public:
  explicit SpreadingFactor(int m);

  int value() const { return m_; }
  /// Zero-based index (m - 7), handy for per-SF tables.
  int index() const { return m_ - 7; }
  /// Low data rate optimization is mandatory for SF11 and SF12.
  bool low_data_rate_optimized() const { return m_ >= 11; }

  static std::array<SpreadingFactor, 6> all();

  auto operator<=>(const SpreadingFactor&) const = default;

 private:
  int m_;
};

constexpr int kSpreadingFactorCount = 6;

/// Radio and deployment constants shared by both engines.
///
/// Note on units: the deterministic path gain is A(fc) = fc^2 * 10^-2.8
/// with the carrier frequency expressed in GHz. The absolute scale of A is
/// absorbed by the cell-radius calibration in the deployment module (the
/// default radius is the raw SF12 sensitivity range), so all reported
/// probabilities depend only on dB gaps, not on the unit convention.
struct PhyConfig {
  double bandwidth_hz = 125000.0;
  int coding_rate = 1;           // CR index i, code rate 4/(4+i), i in {1..4}
  int preamble_symbols = 12;     // n_pre, >= 10
  int payload_bytes = 50;        // B
  double tx_power_dbm = 14.0;    // P0
  double carrier_freq_ghz = 0.868;
  double path_loss_exponent = 4.0;  // alpha, > 2
  double cell_radius = 0.0;      // 0 -> derived from the SF12 sensitivity range
  int channel_count = 8;         // N_c in {1..8}
  double duty_cycle = 0.01;      // DC in (0, 1]

  /// Thermal noise floor: -174 + 10*log10(BW) dBm (0 dB noise figure).
  double noise_power_dbm() const;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct ThresholdRow {
  double sensitivity_dbm;  // theta_RX_m
  double snr_db;           // Gamma_m, capture vs. noise
  double inter_sf_db;      // Gamma_int_m, capture vs. inter-SF interference

  bool operator==(const ThresholdRow&) const = default;
};

/// Per-SF capture thresholds plus the SF-independent co-SF threshold.
/// The co-SF threshold (6 dB) is never below any inter-SF threshold, which
/// is what lets the mixed-interference condition collapse to the co-SF one.
struct CaptureThresholds {
  std::array<ThresholdRow, kSpreadingFactorCount> rows;
  double co_sf_db = 6.0;

  const ThresholdRow& row(SpreadingFactor sf) const { return rows[sf.index()]; }

  /// Stock SX127x-class values (sensitivity, SNR, inter-SF in dBm/dB/dB).
  static CaptureThresholds lora_defaults();
};

struct FrameTiming {
  int payload_symbols = 0;     // n_pkt (LoRa header + payload + CRC)
  int frame_symbols = 0;       // n_pre + n_pkt
  double symbol_period_s = 0;  // T_s
  double airtime_s = 0;        // T_f

  bool operator==(const FrameTiming&) const = default;
};

/// T_s = 2^m / BW.
double symbol_period(SpreadingFactor sf, double bandwidth_hz);

/// Symbols needed for the LoRa header plus B payload bytes:
/// 8 + max(ceil((8B - 4m + 44) / (4m - 2*I_DE)) * (CR + 4), 0).
int payload_symbols(int payload_bytes, SpreadingFactor sf, int coding_rate);

FrameTiming frame_airtime(int payload_bytes, SpreadingFactor sf, int coding_rate,
                          int preamble_symbols, double bandwidth_hz);

FrameTiming frame_airtime(const PhyConfig& phy, SpreadingFactor sf);

std::array<FrameTiming, kSpreadingFactorCount> frame_airtimes(const PhyConfig& phy);

/// Duty-cycle cap on the per-device frame rate: mu_d = DC / T_f.
double max_device_rate(double airtime_s, double duty_cycle);

/// Deterministic path gain A(fc) = fc^2 * 10^-2.8, fc in GHz.
double path_gain_constant(double carrier_freq_ghz);

/// Link-budget constant c = P0 * A(fc) / noise, all in linear units.
double snr_constant(double tx_power_dbm, double carrier_freq_ghz, double noise_dbm);

double snr_constant(const PhyConfig& phy);

}  // namespace loracell
