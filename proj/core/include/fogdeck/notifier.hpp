#pragma once

// Alert sinks for breach episodes. Every dispatch is recorded by Notifier,
// whether or not the sink delivered it.

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fogdeck/model.hpp"

namespace fogdeck::control {

struct Alert {
  DeviceId device;
  std::uint64_t episode = 0;
  double value = 0.0;
  WorkingRange range;
  TimestampMs at = 0;
  std::string subject;
  std::string body;
};

struct DispatchRecord {
  Alert alert;
  std::string sink;
  bool delivered = false;
  std::string error;
};

class AlertSink {
 public:
  virtual ~AlertSink() = default;
  virtual std::string name() const = 0;
  /// Throws on delivery failure.
  virtual void send(const Alert& alert) = 0;
};

class NullSink final : public AlertSink {
 public:
  std::string name() const override { return "null"; }
  void send(const Alert&) override {}
};

/// Appends one JSON line per alert.
class FileLogSink final : public AlertSink {
 public:
  explicit FileLogSink(std::filesystem::path path) : path_(std::move(path)) {}
  std::string name() const override { return "file"; }
  void send(const Alert& alert) override;

 private:
  std::filesystem::path path_;
};

struct SmtpConfig {
  std::string url;  // smtp://host:port or smtps://host:port
  std::string from;
  std::vector<std::string> to;
  std::string username;
  std::string password;
  std::chrono::milliseconds timeout{5000};
};

/// Plain-text mail through libcurl's SMTP client.
class SmtpSink final : public AlertSink {
 public:
  explicit SmtpSink(SmtpConfig config);
  std::string name() const override { return "smtp"; }
  void send(const Alert& alert) override;

 private:
  SmtpConfig config_;
};

class Notifier {
 public:
  explicit Notifier(std::unique_ptr<AlertSink> sink = std::make_unique<NullSink>());

  /// Never throws; a sink failure is kept in the record.
  DispatchRecord dispatch(Alert alert);
  std::vector<DispatchRecord> records() const;
  std::string sink_name() const;

 private:
  mutable std::mutex mutex_;
  std::unique_ptr<AlertSink> sink_;
  std::vector<DispatchRecord> records_;
};

}  // namespace fogdeck::control
