#include <gtest/gtest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>

#include "temp_dir.hpp"
#include "ws_client.hpp"
#include "zonewatch/error.hpp"
#include "zonewatch/server.hpp"

namespace zonewatch {
namespace {

using nlohmann::json;
using testing::WsClient;

namespace http = boost::beast::http;

ServerOptions ephemeral() {
  ServerOptions o;
  o.address = "127.0.0.1";
  o.port = 0;
  return o;
}

DetectionFrame person_at(std::int64_t index, Point c) {
  DetectionFrame f;
  f.frame_index = index;
  f.source_w = 640;
  f.source_h = 480;
  f.detections.push_back({"person", {c.x - 5, c.y - 5, c.x + 5, c.y + 5}, 0.9, 1});
  return f;
}

void draw_square(WsClient& c, double x0, double y0, double side) {
  c.send(json{{"type", "stroke_begin"}, {"x", x0}, {"y", y0}});
  c.send(json{{"type", "stroke_move"}, {"points", {{x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}}}});
  c.send(json{{"type", "stroke_end"}});
}

http::response<http::string_body> http_get(std::uint16_t port, const std::string& target) {
  boost::asio::io_context ioc;
  boost::beast::tcp_stream stream(ioc);
  boost::asio::ip::tcp::resolver resolver(ioc);
  stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req(http::verb::get, target, 11);
  req.set(http::field::host, "127.0.0.1");
  http::write(stream, req);
  boost::beast::flat_buffer buffer;
  http::response<http::string_body> res;
  http::read(stream, buffer, res);
  boost::beast::error_code ec;
  stream.socket().shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
  return res;
}

TEST(Server, TwoClientsReceiveTheSameReport) {
  Server server({}, ephemeral());
  server.start();
  WsClient a(server.port());
  WsClient b(server.port());
  EXPECT_EQ(a.read_json()["type"], "zones");
  EXPECT_EQ(b.read_json()["type"], "zones");

  draw_square(a, 100, 100, 100);
  EXPECT_EQ(a.read_until("zones")["zones"].size(), 1u);
  EXPECT_EQ(b.read_until("zones")["zones"].size(), 1u);

  server.submit_frame(person_at(5, {150, 150}));
  const json ra = a.read_until("report");
  const json rb = b.read_until("report");
  EXPECT_EQ(ra, rb);
  EXPECT_EQ(ra["frame"], 5);
  EXPECT_EQ(ra["zones"][0]["count"], 1);
  EXPECT_EQ(ra["zones"][0]["state"], "occupied");
  server.stop();
}

TEST(Server, LateJoinerGetsSnapshotThenLatestReport) {
  Server server({}, ephemeral());
  server.start();
  {
    WsClient first(server.port());
    first.read_json();
    draw_square(first, 100, 100, 100);
    first.read_until("zones");
  }
  for (int i = 0; i < 4; ++i) server.submit_frame(person_at(i, {150, 150}));
  server.drain();

  WsClient late(server.port());
  const json zones = late.read_json();
  EXPECT_EQ(zones["type"], "zones");
  EXPECT_EQ(zones["zones"][0]["state"], "occupied");
  const json report = late.read_json();
  EXPECT_EQ(report["type"], "report");
  EXPECT_EQ(report["frame"], 3);
  server.stop();
}

TEST(Server, ReportSinkSeesFramesInOrder) {
  Server server({}, ephemeral());
  std::vector<std::string> lines;
  server.set_report_sink([&](const std::string& line) { lines.push_back(line); });
  server.start();
  for (int i : {0, 1, 1, 3, 2, 4}) server.submit_frame(person_at(i, {10, 10}));
  server.drain();
  server.stop();
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(json::parse(lines[2])["frame"], 3);
  EXPECT_EQ(json::parse(lines[3])["frame"], 4);
}

TEST(Server, ErrorRepliesGoOnlyToSender) {
  Server server({}, ephemeral());
  server.start();
  WsClient a(server.port());
  WsClient b(server.port());
  a.read_json();
  b.read_json();
  a.send(std::string("{oops"));
  EXPECT_EQ(a.read_json()["type"], "error");
  b.send(json{{"type", "save_zones"}});
  EXPECT_EQ(b.read_json()["type"], "zones");  // not the error
  server.stop();
}

TEST(Server, InspectRunsOnSessionThread) {
  Server server({}, ephemeral());
  server.start();
  WsClient c(server.port());
  c.read_json();
  draw_square(c, 0, 0, 50);
  c.read_until("zones");
  std::size_t zones = 0;
  server.inspect([&](const SessionCore& core) { zones = core.drawing().zones().zones.size(); });
  EXPECT_EQ(zones, 1u);
  server.stop();
}

TEST(Server, ServesStaticFiles) {
  testing::TempDir dir("zw_static");
  dir.write("index.html", "<html>zonewatch</html>");
  dir.write("app.js", "console.log(1);");
  ServerOptions o = ephemeral();
  o.static_dir = dir.path;
  Server server({}, o);
  server.start();

  auto index = http_get(server.port(), "/");
  EXPECT_EQ(index.result(), http::status::ok);
  EXPECT_EQ(index.body(), "<html>zonewatch</html>");
  EXPECT_NE(std::string(index[http::field::content_type]).find("text/html"), std::string::npos);

  auto js = http_get(server.port(), "/app.js");
  EXPECT_EQ(js.result(), http::status::ok);
  EXPECT_EQ(js.body(), "console.log(1);");

  EXPECT_EQ(http_get(server.port(), "/missing.css").result(), http::status::not_found);
  EXPECT_NE(http_get(server.port(), "/../etc/passwd").result(), http::status::ok);
  server.stop();
}

TEST(Server, BusyPortThrowsIoError) {
  Server first({}, ephemeral());
  ServerOptions o = ephemeral();
  o.port = first.port();
  EXPECT_THROW(Server({}, o), IoError);
}

TEST(Server, StopIsIdempotentAndDrainAfterStopReturns) {
  Server server({}, ephemeral());
  server.start();
  server.stop();
  server.stop();
  server.submit_frame(person_at(0, {1, 1}));
  server.drain();
  EXPECT_EQ(server.stats().frames, 1u);
}

TEST(Server, SlowClientLosesMessagesNotTheSession) {
  ServerOptions o = ephemeral();
  o.client_queue_limit = 2;
  Server server({}, o);
  server.start();
  WsClient slow(server.port());
  slow.read_json();  // registered; now stop reading

  const std::string image(1 << 20, 'A');
  for (int i = 0; i < 64; ++i) {
    DetectionFrame f = person_at(i, {1, 1});
    f.image_b64 = image;
    server.submit_frame(std::move(f));
  }
  server.drain();
  EXPECT_EQ(server.stats().frames, 64u);
  EXPECT_GT(server.stats().dropped_messages, 0u);
  std::optional<OccupancyReport> last;
  server.inspect([&](const SessionCore& core) { last = core.last_report(); });
  ASSERT_TRUE(last.has_value());
  EXPECT_EQ(last->frame_index, 63);
  server.stop();
}

}  // namespace
}  // namespace zonewatch
