#include "loracell/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "loracell/units.hpp"

namespace loracell {

namespace {

double exponential_from_u64(std::uint64_t word) {
  const double u = static_cast<double>(word >> 11) * 0x1.0p-53;
  return -std::log(1.0 - u);
}

// Stateless per-symbol fading: one exponential draw per (frame, symbol).
double symbol_fading(std::uint64_t frame_seed, int symbol) {
  std::uint64_t state = frame_seed ^ (0x9e3779b97f4a7c15ULL * (symbol + 1));
  return exponential_from_u64(detail::splitmix64(state));
}

}  // namespace

std::vector<FrameEvent> generate_trace(const AllocationSet& alloc,
                                       const PhyConfig& phy, int devices,
                                       double device_rate_hz, double duration_s,
                                       Rng& rng, FadingModel fading,
                                       std::vector<DevicePlacement>* placements) {
  if (devices < 0) throw std::invalid_argument("devices must be >= 0");
  if (device_rate_hz < 0) throw std::invalid_argument("device_rate_hz must be >= 0");
  if (duration_s < 0) throw std::invalid_argument("duration_s must be >= 0");

  const auto timings = frame_airtimes(phy);
  std::vector<FrameEvent> trace;
  if (placements != nullptr) {
    placements->clear();
    placements->reserve(devices);
  }

  for (int d = 0; d < devices; ++d) {
    const DevicePlacement place = sample_device(alloc, d, device_rate_hz, rng);
    const double cap = max_device_rate(timings[place.sf.index()].airtime_s,
                                       phy.duty_cycle);
    if (device_rate_hz >= cap) {
      throw std::invalid_argument(
          "duty-cycle violation: device rate " + std::to_string(device_rate_hz) +
          "/s exceeds the SF" + std::to_string(place.sf.value()) + " cap " +
          std::to_string(cap) + "/s");
    }
    if (placements != nullptr) placements->push_back(place);
    if (device_rate_hz == 0.0) continue;

    double t = rng.exponential(1.0 / device_rate_hz);
    while (t < duration_s) {
      FrameEvent f;
      f.device = d;
      f.sf = place.sf;
      f.channel = rng.uniform_int(phy.channel_count);
      f.start_s = t;
      f.timing = timings[place.sf.index()];
      f.fading_seed = rng.next_u64();
      f.fading_gain = fading == FadingModel::none
                          ? 1.0
                          : exponential_from_u64(rng.next_u64());
      f.distance = place.distance;
      trace.push_back(f);
      t += rng.exponential(1.0 / device_rate_hz);
    }
  }

  std::sort(trace.begin(), trace.end(), [](const FrameEvent& a, const FrameEvent& b) {
    if (a.start_s != b.start_s) return a.start_s < b.start_s;
    return a.device < b.device;
  });
  for (std::size_t i = 0; i < trace.size(); ++i) {
    trace[i].id = static_cast<std::int64_t>(i);
  }
  return trace;
}

CaptureEvaluator::CaptureEvaluator(const PhyConfig& phy,
                                   const CaptureThresholds& thresholds,
                                   FadingModel fading)
    : thresholds_(thresholds),
      fading_(fading),
      alpha_(phy.path_loss_exponent),
      inv_c_(1.0 / snr_constant(phy)),
      gamma_co_lin_(db_to_linear(thresholds.co_sf_db)) {
  for (const auto sf : SpreadingFactor::all()) {
    gamma_snr_lin_[sf.index()] = db_to_linear(thresholds.row(sf).snr_db);
    gamma_inter_lin_[sf.index()] = db_to_linear(thresholds.row(sf).inter_sf_db);
  }
}

double CaptureEvaluator::own_gain(const FrameEvent& frame, int symbol) const {
  if (fading_ == FadingModel::per_symbol) {
    return symbol_fading(frame.fading_seed, symbol);
  }
  return frame.fading_gain;
}

double CaptureEvaluator::interferer_gain(const FrameEvent& frame, double t0,
                                         double t1) const {
  if (fading_ != FadingModel::per_symbol) return frame.fading_gain;
  const double mid =
      0.5 * (std::max(t0, frame.start_s) + std::min(t1, frame.end_s()));
  const int symbol = std::clamp(
      static_cast<int>((mid - frame.start_s) / frame.timing.symbol_period_s), 0,
      frame.timing.frame_symbols - 1);
  return symbol_fading(frame.fading_seed, symbol);
}

CaptureOutcome CaptureEvaluator::evaluate(
    const FrameEvent& frame, std::span<const FrameEvent* const> overlapping) const {
  const int sf_index = frame.sf.index();
  const double signal_base = std::pow(frame.distance, -alpha_);
  const double noise_gate = gamma_snr_lin_[sf_index] * inv_c_;
  const double gamma_inter = gamma_inter_lin_[sf_index];
  const int symbols = frame.timing.frame_symbols;
  const int preamble = symbols - frame.timing.payload_symbols;
  const double ts = frame.timing.symbol_period_s;
  const double start = frame.start_s;
  const double end = frame.end_s();

  std::vector<const FrameEvent*> interferers;
  for (const FrameEvent* g : overlapping) {
    if (g->id == frame.id || g->channel != frame.channel) continue;
    if (g->start_s < end && g->end_s() > start) interferers.push_back(g);
  }

  CaptureOutcome out;
  if (interferers.empty() && fading_ != FadingModel::per_symbol) {
    const bool pass = frame.fading_gain * signal_base > noise_gate;
    out.covered = pass;
    out.captured = pass;
    if (pass && preamble >= 4) {
      out.detected = true;
      out.detection_time_s = start + 4.0 * ts;
    }
    return out;
  }

  std::vector<unsigned char> pass(symbols, 0);
  bool covered_all = true;
  bool captured_all = true;
  for (int j = 0; j < symbols; ++j) {
    const double t0 = start + j * ts;
    const double t1 = t0 + ts;
    const double p = own_gain(frame, j) * signal_base;
    bool ok = p > noise_gate;
    covered_all = covered_all && ok;
    if (ok && !interferers.empty()) {
      double co_power = 0.0;
      double inter_power = 0.0;
      for (const FrameEvent* g : interferers) {
        if (g->start_s >= t1 || g->end_s() <= t0) continue;
        const double power =
            interferer_gain(*g, t0, t1) * std::pow(g->distance, -alpha_);
        if (g->sf == frame.sf) {
          co_power += power;
        } else {
          inter_power += power;
        }
      }
      if (co_power > 0.0 && inter_power > 0.0) {
        ok = p > gamma_co_lin_ * (co_power + inter_power + inv_c_);
      } else if (co_power > 0.0) {
        ok = p > gamma_co_lin_ * (co_power + inv_c_);
      } else if (inter_power > 0.0) {
        ok = p > gamma_inter * (inter_power + inv_c_);
      }
    }
    captured_all = captured_all && ok;
    pass[j] = ok ? 1 : 0;
  }

  out.covered = covered_all;
  out.captured = captured_all;
  for (int j = 0; j + 4 <= preamble; ++j) {
    if (pass[j] && pass[j + 1] && pass[j + 2] && pass[j + 3]) {
      out.detected = true;
      out.detection_time_s = start + (j + 4.0) * ts;
      break;
    }
  }
  return out;
}

DemodulatorState::DemodulatorState(int path_count) : path_count_(path_count) {
  if (path_count < 1) throw std::invalid_argument("path_count must be >= 1");
  release_times_.reserve(path_count);
}

bool DemodulatorState::on_detection(double now, double release_s) {
  while (!release_times_.empty() && release_times_.front() <= now) {
    std::pop_heap(release_times_.begin(), release_times_.end(), std::greater<>());
    release_times_.pop_back();
  }
  assert(static_cast<int>(release_times_.size()) <= path_count_);
  if (static_cast<int>(release_times_.size()) == path_count_) return false;
  release_times_.push_back(release_s);
  std::push_heap(release_times_.begin(), release_times_.end(), std::greater<>());
  max_busy_seen_ = std::max(max_busy_seen_, busy_paths());
  return true;
}

std::vector<bool> assign_demodulation_paths(std::vector<DetectionEvent> detections,
                                            int path_count, int* max_busy_seen) {
  std::sort(detections.begin(), detections.end(),
            [](const DetectionEvent& a, const DetectionEvent& b) {
              if (a.time_s != b.time_s) return a.time_s < b.time_s;
              return a.frame_id < b.frame_id;
            });
  DemodulatorState state(path_count);
  std::vector<bool> granted(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    granted[i] = state.on_detection(detections[i].time_s, detections[i].release_s);
  }
  if (max_busy_seen != nullptr) *max_busy_seen = state.max_busy_seen();
  return granted;
}

SfCounts& SfCounts::operator+=(const SfCounts& other) {
  generated += other.generated;
  covered += other.covered;
  captured += other.captured;
  detected += other.detected;
  dropped_no_path += other.dropped_no_path;
  succeeded += other.succeeded;
  return *this;
}

ReplicationResult run_replication(const AllocationSet& alloc, const PhyConfig& phy,
                                  const CaptureThresholds& thresholds,
                                  const SimConfig& config, Rng rng) {
  const auto trace = generate_trace(alloc, phy, config.devices,
                                    config.device_rate_hz, config.duration_s, rng,
                                    config.fading);
  const auto timings = frame_airtimes(phy);
  double max_airtime = 0.0;
  for (const auto& t : timings) max_airtime = std::max(max_airtime, t.airtime_s);

  std::vector<std::vector<std::int64_t>> by_channel(phy.channel_count);
  for (const auto& f : trace) by_channel[f.channel].push_back(f.id);

  CaptureEvaluator evaluator(phy, thresholds, config.fading);
  std::vector<CaptureOutcome> outcomes(trace.size());
  std::vector<const FrameEvent*> candidates;
  for (const auto& channel : by_channel) {
    for (std::size_t pos = 0; pos < channel.size(); ++pos) {
      const FrameEvent& f = trace[channel[pos]];
      candidates.clear();
      for (std::size_t k = pos; k-- > 0;) {
        const FrameEvent& g = trace[channel[k]];
        if (g.start_s <= f.start_s - max_airtime) break;
        if (g.end_s() > f.start_s) candidates.push_back(&g);
      }
      for (std::size_t k = pos + 1; k < channel.size(); ++k) {
        const FrameEvent& g = trace[channel[k]];
        if (g.start_s >= f.end_s()) break;
        candidates.push_back(&g);
      }
      outcomes[f.id] = evaluator.evaluate(f, candidates);
    }
  }

  std::vector<DetectionEvent> detections;
  detections.reserve(trace.size());
  for (const auto& f : trace) {
    if (outcomes[f.id].detected) {
      detections.push_back({outcomes[f.id].detection_time_s, f.id, f.end_s()});
    }
  }
  std::sort(detections.begin(), detections.end(),
            [](const DetectionEvent& a, const DetectionEvent& b) {
              if (a.time_s != b.time_s) return a.time_s < b.time_s;
              return a.frame_id < b.frame_id;
            });

  ReplicationResult result;
  DemodulatorState demod;
  std::vector<unsigned char> path_granted(trace.size(), 0);
  for (const auto& d : detections) {
    path_granted[d.frame_id] = demod.on_detection(d.time_s, d.release_s) ? 1 : 0;
  }
  result.max_busy_paths = demod.max_busy_seen();

  if (config.collect_trace) result.trace.reserve(trace.size());
  for (const auto& f : trace) {
    const CaptureOutcome& o = outcomes[f.id];
    const bool path = path_granted[f.id] != 0;
    SfCounts& counts = result.counts[f.sf.index()];
    ++counts.generated;
    if (o.covered) ++counts.covered;
    if (o.captured) ++counts.captured;
    if (o.detected) ++counts.detected;
    if (o.detected && !path) ++counts.dropped_no_path;
    const bool succeeded = o.captured && path;
    if (succeeded) ++counts.succeeded;
    if (config.collect_trace) {
      result.trace.push_back({f.id, f.device, f.sf.value(), f.channel, f.start_s,
                              f.timing.airtime_s, f.fading_gain, f.distance,
                              o.covered, o.captured, o.detected, path, succeeded});
    }
  }
  return result;
}

namespace {

Proportion make_proportion(std::int64_t successes, std::int64_t trials,
                           std::span<const double> per_rep) {
  Proportion p;
  p.successes = successes;
  p.trials = trials;
  if (trials > 0) {
    p.value = static_cast<double>(successes) / static_cast<double>(trials);
  }
  p.wilson = wilson_interval(successes, trials);
  p.std_error = std_error(per_rep);
  return p;
}

}  // namespace

SimStats run_simulation(const AllocationSet& alloc, const PhyConfig& phy,
                        const CaptureThresholds& thresholds,
                        const SimConfig& config) {
  if (config.replications < 1) {
    throw std::invalid_argument("replications must be >= 1");
  }
  phy.validate();

  const Rng master(config.seed);
  std::vector<ReplicationResult> replications(config.replications);
  int workers = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, config.replications);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= config.replications) return;
      replications[rep] =
          run_replication(alloc, phy, thresholds, config, master.stream(rep));
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SimStats stats;
  stats.replications = config.replications;
  for (int rep = 0; rep < config.replications; ++rep) {
    const auto& r = replications[rep];
    stats.max_busy_paths = std::max(stats.max_busy_paths, r.max_busy_paths);
    for (int i = 0; i < kSpreadingFactorCount; ++i) {
      stats.counts[i] += r.counts[i];
      stats.total += r.counts[i];
    }
    if (config.collect_trace) {
      for (TraceRow row : r.trace) {
        row.frame_id += static_cast<std::int64_t>(rep) << 40;
        stats.trace.push_back(row);
      }
    }
  }

  // Between-replication standard errors need per-replication estimates.
  const auto collect = [&](auto numerator, auto denominator, int sf_index) {
    std::vector<double> values;
    values.reserve(config.replications);
    for (const auto& r : replications) {
      std::int64_t num = 0;
      std::int64_t den = 0;
      if (sf_index < 0) {
        for (const auto& c : r.counts) {
          num += numerator(c);
          den += denominator(c);
        }
      } else {
        num = numerator(r.counts[sf_index]);
        den = denominator(r.counts[sf_index]);
      }
      if (den > 0) values.push_back(static_cast<double>(num) / den);
    }
    return values;
  };

  const auto gen = [](const SfCounts& c) { return c.generated; };
  const auto cov = [](const SfCounts& c) { return c.covered; };
  const auto cap = [](const SfCounts& c) { return c.captured; };
  const auto suc = [](const SfCounts& c) { return c.succeeded; };
  const auto det = [](const SfCounts& c) { return c.detected; };
  const auto dro = [](const SfCounts& c) { return c.dropped_no_path; };

  for (int i = 0; i < kSpreadingFactorCount; ++i) {
    const SfCounts& c = stats.counts[i];
    stats.cp[i] = make_proportion(c.covered, c.generated, collect(cov, gen, i));
    stats.fcp[i] = make_proportion(c.captured, c.generated, collect(cap, gen, i));
    stats.fsp[i] = make_proportion(c.succeeded, c.generated, collect(suc, gen, i));
  }
  stats.fdp = make_proportion(stats.total.dropped_no_path, stats.total.detected,
                              collect(dro, det, -1));
  stats.cell_coverage =
      make_proportion(stats.total.covered, stats.total.generated, collect(cov, gen, -1));

  std::vector<double> throughput;
  throughput.reserve(config.replications);
  for (const auto& r : replications) {
    std::int64_t succeeded = 0;
    for (const auto& c : r.counts) succeeded += c.succeeded;
    throughput.push_back(static_cast<double>(succeeded) * phy.payload_bytes /
                         config.duration_s);
  }
  stats.throughput_Bps = mean(throughput);
  stats.throughput_se = std_error(throughput);
  return stats;
}

}  // namespace loracell
