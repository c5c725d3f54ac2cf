#include "fogdeck/notifier.hpp"

#include <curl/curl.h>

#include <cstring>
#include <fstream>

#include "fogdeck/json_codec.hpp"

namespace fogdeck::control {

void FileLogSink::send(const Alert& alert) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open alert log " + path_.string());
  json line = {{"device", alert.device},   {"episode", alert.episode}, {"value", alert.value},
               {"range", alert.range},     {"at", alert.at},           {"subject", alert.subject},
               {"body", alert.body}};
  out << line.dump() << '\n';
  if (!out) throw std::runtime_error("cannot write alert log " + path_.string());
}

namespace {

struct Upload {
  std::string data;
  std::size_t offset = 0;
};

std::size_t read_upload(char* buffer, std::size_t size, std::size_t nitems, void* user) {
  auto* up = static_cast<Upload*>(user);
  auto n = std::min(size * nitems, up->data.size() - up->offset);
  std::memcpy(buffer, up->data.data() + up->offset, n);
  up->offset += n;
  return n;
}

}  // namespace

SmtpSink::SmtpSink(SmtpConfig config) : config_(std::move(config)) {
  if (config_.url.empty() || config_.from.empty() || config_.to.empty()) {
    throw std::invalid_argument("smtp sink needs url, from and at least one recipient");
  }
  static std::once_flag once;
  std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
}

void SmtpSink::send(const Alert& alert) {
  Upload up;
  up.data = "From: " + config_.from + "\r\n";
  for (const auto& to : config_.to) up.data += "To: " + to + "\r\n";
  up.data += "Subject: " + alert.subject + "\r\n\r\n" + alert.body + "\r\n";

  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw std::runtime_error("curl_easy_init failed");
  curl_slist* rcpt = nullptr;
  for (const auto& to : config_.to) rcpt = curl_slist_append(rcpt, ("<" + to + ">").c_str());
  std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> rcpt_guard(rcpt, curl_slist_free_all);

  auto from = "<" + config_.from + ">";
  curl_easy_setopt(curl.get(), CURLOPT_URL, config_.url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_MAIL_FROM, from.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_MAIL_RCPT, rcpt);
  curl_easy_setopt(curl.get(), CURLOPT_READFUNCTION, read_upload);
  curl_easy_setopt(curl.get(), CURLOPT_READDATA, &up);
  curl_easy_setopt(curl.get(), CURLOPT_UPLOAD, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(config_.timeout.count()));
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  if (!config_.username.empty()) {
    curl_easy_setopt(curl.get(), CURLOPT_USERNAME, config_.username.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_PASSWORD, config_.password.c_str());
  }
  auto rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) throw std::runtime_error(std::string("smtp: ") + curl_easy_strerror(rc));
}

Notifier::Notifier(std::unique_ptr<AlertSink> sink) : sink_(std::move(sink)) {
  if (!sink_) sink_ = std::make_unique<NullSink>();
}

DispatchRecord Notifier::dispatch(Alert alert) {
  std::lock_guard lock(mutex_);
  DispatchRecord rec{std::move(alert), sink_->name(), false, ""};
  try {
    sink_->send(rec.alert);
    rec.delivered = true;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  records_.push_back(rec);
  return rec;
}

std::vector<DispatchRecord> Notifier::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::string Notifier::sink_name() const {
  std::lock_guard lock(mutex_);
  return sink_->name();
}

}  // namespace fogdeck::control
