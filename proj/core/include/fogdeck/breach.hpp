#pragma once

// Edge-triggered breach episodes: one episode per maximal run of Abnormal
// evaluations of a device, at most one alert per episode.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fogdeck/model.hpp"
#include "fogdeck/notifier.hpp"

namespace fogdeck::control {

struct BreachEpisode {
  std::uint64_t id = 0;
  DeviceId device;
  TimestampMs started_at = 0;
  std::optional<TimestampMs> ended_at;
  double peak_value = 0.0;  // farthest from the range
  bool alert_sent = false;
  bool operator==(const BreachEpisode&) const = default;
};

enum class EpisodeChange { Opened, Closed };

struct EpisodeUpdate {
  EpisodeChange change;
  BreachEpisode episode;
};

class BreachTracker {
 public:
  /// Feeds one evaluated reading. Readings of a device must arrive in seq
  /// order; older or repeated seqs are ignored. An alert goes to `notifier`
  /// when an episode opens and `email_alerts` is set.
  std::optional<EpisodeUpdate> observe(const SensorReading& reading, const WorkingRange& range, bool email_alerts,
                                       Notifier* notifier);

  std::vector<BreachEpisode> episodes() const;
  std::optional<BreachEpisode> open_episode(const DeviceId& device) const;

 private:
  struct DeviceTrack {
    std::uint64_t last_seq = 0;
    std::optional<std::size_t> open;  // index into episodes_
  };
  std::map<DeviceId, DeviceTrack> tracks_;
  std::vector<BreachEpisode> episodes_;
};

}  // namespace fogdeck::control
