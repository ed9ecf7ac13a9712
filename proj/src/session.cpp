#include <algorithm>

#include <omp.h>

#include "vortexqkd/channel.hpp"

namespace vortexqkd {

namespace {

struct BatchResult {
  TallyTable tally;
  std::vector<PulseRecord> records;
};

void run_chunk(const SessionModel& model, std::uint64_t chunk, bool keep_records,
               BatchResult& out) {
  const std::uint64_t total = model.config().pulses;
  const std::uint64_t begin = chunk * kChunkPulses;
  const std::uint64_t end = std::min(total, begin + kChunkPulses);
  std::mt19937_64 rng = chunk_stream(model.config().seed, chunk);
  for (std::uint64_t i = begin; i < end; ++i) {
    const PulseRecord r = sample_pulse(model, rng, i);
    out.tally.add(r);
    if (keep_records && r.sifted) out.records.push_back(r);
  }
}

}  // namespace

SessionResult run_session(const SessionConfig& config, const OpticsConfig& optics,
                          const SessionOptions& options) {
  const SessionModel model(config, optics);
  const std::uint64_t chunks = (config.pulses + kChunkPulses - 1) / kChunkPulses;

  int threads = omp_get_max_threads();
  if (options.max_threads > 0) threads = std::min(threads, options.max_threads);
  const auto batches = static_cast<std::uint64_t>(
      std::max<std::uint64_t>(1, options.batches > 0 ? static_cast<std::uint64_t>(options.batches)
                                                     : static_cast<std::uint64_t>(threads)));

  std::vector<BatchResult> partial(batches);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(batches); ++b) {
    const auto ub = static_cast<std::uint64_t>(b);
    const std::uint64_t first = chunks * ub / batches;
    const std::uint64_t last = chunks * (ub + 1) / batches;
    for (std::uint64_t c = first; c < last; ++c) {
      run_chunk(model, c, options.keep_records, partial[ub]);
    }
  }

  SessionResult result;
  for (BatchResult& p : partial) {
    result.tally += p.tally;
    result.records.insert(result.records.end(), p.records.begin(), p.records.end());
  }
  return result;
}

SessionResult run_session_serial(const SessionConfig& config, const OpticsConfig& optics,
                                 bool keep_records) {
  const SessionModel model(config, optics);
  SessionResult result;
  std::mt19937_64 rng;
  for (std::uint64_t i = 0; i < config.pulses; ++i) {
    if (i % kChunkPulses == 0) rng = chunk_stream(config.seed, i / kChunkPulses);
    const PulseRecord r = sample_pulse(model, rng, i);
    result.tally.add(r);
    if (keep_records && r.sifted) result.records.push_back(r);
  }
  return result;
}

}  // namespace vortexqkd
