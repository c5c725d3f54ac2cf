#include <benchmark/benchmark.h>

#include "fogdeck/datastore.hpp"
#include "fogdeck/fleet.hpp"
#include "fogdeck/fog_agent.hpp"
#include "fogdeck/messages.hpp"
#include "fogdeck/wire.hpp"

using namespace fogdeck;

static void BM_EncodeFrame(benchmark::State& state) {
  auto key = wire::PresharedKey::derive("bench");
  std::vector<std::uint8_t> payload(state.range(0), 0x5a);
  std::uint64_t ctr = 0;
  for (auto _ : state) benchmark::DoNotOptimize(wire::encode_frame(wire::MsgType::ReadingBatch, payload, key, ++ctr));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeFrame)->Arg(64)->Arg(1024)->Arg(64 * 1024);

static void BM_DecodeFrame(benchmark::State& state) {
  auto key = wire::PresharedKey::derive("bench");
  std::vector<std::uint8_t> payload(state.range(0), 0x5a);
  auto frame = wire::encode_frame(wire::MsgType::ReadingBatch, payload, key, 1);
  for (auto _ : state) benchmark::DoNotOptimize(wire::decode_frame(frame, key, 0));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecodeFrame)->Arg(64)->Arg(1024)->Arg(64 * 1024);

static void BM_ReadingBatchPayload(benchmark::State& state) {
  wire::ReadingBatchMsg msg{"fog-1", {}};
  for (std::uint64_t i = 1; i <= static_cast<std::uint64_t>(state.range(0)); ++i) {
    msg.readings.push_back(SensorReading{{"fog-1", "sensor-1"}, 21.5, Unit::Celsius, 1'700'000'000'000, i});
  }
  for (auto _ : state) benchmark::DoNotOptimize(wire::reading_batch_from_payload(wire::to_payload(msg)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReadingBatchPayload)->Arg(10)->Arg(1000);

static void BM_DatastorePut(benchmark::State& state) {
  store::Datastore ds;
  std::uint64_t seq = 0;
  std::vector<SensorReading> batch(state.range(0));
  for (auto _ : state) {
    for (auto& r : batch) r = SensorReading{{"fog-1", "sensor-1"}, 21.5, Unit::Celsius, 0, ++seq};
    benchmark::DoNotOptimize(ds.put_readings(batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DatastorePut)->Arg(10)->Arg(1000);

static void BM_AgentTick(benchmark::State& state) {
  auto spec = generate_fleet({1, static_cast<std::size_t>(state.range(0)), 7, 0, std::chrono::seconds(1)})[0];
  fog::AgentConfig cfg;
  cfg.fog_id = spec.fog_id;
  fog::FogAgent agent(cfg, spec.devices);
  std::int64_t t = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent.tick(SimTime(t)));
    agent.push_cycle([](std::span<const SensorReading> b) { return b.size(); });
    t += 1000;
  }
}
BENCHMARK(BM_AgentTick)->Arg(4)->Arg(10)->Arg(100);
BENCHMARK_MAIN();
