#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "fogdeck/panel_api.hpp"
#include "rig.hpp"

using namespace fogdeck;
using namespace fogdeck::control;
using namespace fogdeck::testing;

namespace {

struct PanelRig {
  Rig rig{one_node({sensor_spec("fog-1", "sensor-1", 25), buzzer_spec("fog-1")})};
  PanelServer server{*rig.control, PanelServerOptions{"127.0.0.1", 0, ""}};
  std::unique_ptr<httplib::Client> client;

  PanelRig() {
    rig.steps(2);
    server.start();
    client = std::make_unique<httplib::Client>("127.0.0.1", server.port());
    client->set_read_timeout(5, 0);
  }
};

}  // namespace

TEST(PanelApi, PanelJsonParsesBack) {
  PanelRig p;
  auto res = p.client->Get("/api/panel");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  auto model = json::parse(res->body).get<PanelModel>();
  EXPECT_EQ(model, p.rig.control->panel());
  EXPECT_EQ(model.stats.size(), 1u);
}

TEST(PanelApi, SectionEndpoints) {
  PanelRig p;
  for (const char* path : {"/api/health", "/api/network", "/api/security", "/api/alerts"}) {
    auto res = p.client->Get(path);
    ASSERT_TRUE(res) << path;
    EXPECT_EQ(res->status, 200) << path;
    EXPECT_FALSE(json::parse(res->body, nullptr, false).is_discarded()) << path;
  }
  auto net = json::parse(p.client->Get("/api/network")->body);
  EXPECT_EQ(net["network"]["mode"], "online");
}

TEST(PanelApi, ControlRoutes) {
  PanelRig p;
  auto ok = p.client->Post("/api/devices/fog-1/sensor-1/control", R"({"type":"set_enabled","enabled":false})",
                           "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 200);
  EXPECT_EQ(json::parse(ok->body)["path"], "datastore");

  auto unknown = p.client->Post("/api/devices/fog-1/ghost/control", R"({"type":"set_enabled","enabled":false})",
                                "application/json");
  ASSERT_TRUE(unknown);
  EXPECT_EQ(unknown->status, 404);

  auto invalid = p.client->Post("/api/devices/fog-1/buzzer-1/control", R"({"type":"set_threshold","low":1,"high":2})",
                                "application/json");
  ASSERT_TRUE(invalid);
  EXPECT_EQ(invalid->status, 400);

  auto garbage = p.client->Post("/api/devices/fog-1/sensor-1/control", "not json", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);

  auto check = p.client->Post("/api/actuators/check-all", "", "application/json");
  ASSERT_TRUE(check);
  EXPECT_EQ(check->status, 200);
  EXPECT_EQ(json::parse(check->body)["results"].size(), 1u);

  p.rig.steps(2);
  auto panel = json::parse(p.client->Get("/api/panel")->body).get<PanelModel>();
  EXPECT_EQ(panel.stats[0].indicator, Indicator::Grey);
}

TEST(PanelApi, StreamSendsSnapshotThenDelta) {
  PanelRig p;
  std::vector<json> events;
  std::string buf;
  std::thread stepper([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    p.rig.step();
  });
  p.client->Get("/api/stream", [&](const char* data, size_t len) {
    buf.append(data, len);
    for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
      events.push_back(json::parse(buf.substr(0, nl)));
      buf.erase(0, nl + 1);
    }
    return events.size() < 2;
  });
  stepper.join();
  ASSERT_GE(events.size(), 2u);
  EXPECT_EQ(events[0]["type"], "snapshot");
  EXPECT_TRUE(events[0]["model"].contains("stats"));
  EXPECT_EQ(events[1]["type"], "delta");
  EXPECT_GT(events[1]["revision"].get<std::uint64_t>(), events[0]["revision"].get<std::uint64_t>());
  EXPECT_TRUE(events[1]["changes"].contains("stats"));
}

TEST(PanelDelta, OnlyChangedSections) {
  json a = {{"stats", {1}}, {"network", {{"mode", "online"}}}};
  json b = {{"stats", {2}}, {"network", {{"mode", "online"}}}};
  auto d = panel_delta(a, b);
  EXPECT_TRUE(d.contains("stats"));
  EXPECT_FALSE(d.contains("network"));
  EXPECT_TRUE(panel_delta(a, a).empty());
}
