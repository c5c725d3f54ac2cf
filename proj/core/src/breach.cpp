#include "fogdeck/breach.hpp"

#include <cmath>
#include <sstream>

namespace fogdeck::control {

namespace {

double excess(double v, const WorkingRange& r) { return v < r.low ? r.low - v : v > r.high ? v - r.high : 0.0; }

}  // namespace

std::optional<EpisodeUpdate> BreachTracker::observe(const SensorReading& reading, const WorkingRange& range,
                                                    bool email_alerts, Notifier* notifier) {
  auto& track = tracks_[reading.id];
  if (reading.seq <= track.last_seq) return std::nullopt;
  track.last_seq = reading.seq;

  bool abnormal = evaluate_threshold(reading.value, range) == Evaluation::Abnormal;
  if (abnormal && !track.open) {
    BreachEpisode ep{episodes_.size() + 1, reading.id, reading.timestamp, std::nullopt, reading.value, false};
    if (email_alerts && notifier != nullptr) {
      std::ostringstream body;
      body << reading.id.str() << " read " << reading.value << ", outside [" << range.low << ", " << range.high
           << "] at " << reading.timestamp;
      notifier->dispatch(Alert{reading.id, ep.id, reading.value, range, reading.timestamp,
                               "fogdeck alert: " + reading.id.str() + " out of range", body.str()});
      ep.alert_sent = true;
    }
    track.open = episodes_.size();
    episodes_.push_back(ep);
    return EpisodeUpdate{EpisodeChange::Opened, ep};
  }
  if (abnormal) {
    auto& ep = episodes_[*track.open];
    if (excess(reading.value, range) > excess(ep.peak_value, range)) ep.peak_value = reading.value;
    return std::nullopt;
  }
  if (track.open) {
    auto& ep = episodes_[*track.open];
    ep.ended_at = reading.timestamp;
    track.open.reset();
    return EpisodeUpdate{EpisodeChange::Closed, ep};
  }
  return std::nullopt;
}

std::vector<BreachEpisode> BreachTracker::episodes() const { return episodes_; }

std::optional<BreachEpisode> BreachTracker::open_episode(const DeviceId& device) const {
  auto it = tracks_.find(device);
  if (it == tracks_.end() || !it->second.open) return std::nullopt;
  return episodes_[*it->second.open];
}

}  // namespace fogdeck::control
