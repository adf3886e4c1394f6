#include <gtest/gtest.h>

#include <chrono>
#include <mutex>
#include <thread>

#include <boost/asio.hpp>

#include "zonewatch/adapter.hpp"
#include "zonewatch/error.hpp"
#include "zonewatch/trace.hpp"

namespace zonewatch {
namespace {

namespace asio = boost::asio;

class AdapterHarness {
 public:
  AdapterHarness() : adapter_({"127.0.0.1", 0}, 640, 480) {
    thread_ = std::thread([this] {
      adapter_.run([this](DetectionFrame f) {
        std::lock_guard lock(mutex_);
        frames_.push_back(std::move(f));
      });
    });
  }
  ~AdapterHarness() {
    adapter_.stop();
    thread_.join();
  }

  void send(const std::string& text) {
    asio::io_context ioc;
    asio::ip::tcp::socket socket(ioc);
    socket.connect({asio::ip::make_address("127.0.0.1"), adapter_.port()});
    asio::write(socket, asio::buffer(text));
    socket.shutdown(asio::ip::tcp::socket::shutdown_both);
  }

  // Waits until `n` frames plus skipped lines have been seen.
  bool wait_for(std::size_t lines, std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (std::chrono::steady_clock::now() < deadline) {
      const auto s = adapter_.stats();
      if (s.frames + s.malformed + s.out_of_order >= lines) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return false;
  }

  std::vector<DetectionFrame> frames() {
    std::lock_guard lock(mutex_);
    return frames_;
  }
  DetectionAdapter& adapter() { return adapter_; }

 private:
  DetectionAdapter adapter_;
  std::thread thread_;
  std::mutex mutex_;
  std::vector<DetectionFrame> frames_;
};

std::string frame_line(std::int64_t index) {
  return R"({"type":"frame","frame":)" + std::to_string(index) +
         R"(,"t_ms":0,"detections":[{"class":"person","bbox":[1,2,3,4],"score":0.5,"track_id":3}]})" + "\n";
}

TEST(Endpoint, Parse) {
  const Endpoint ep = parse_endpoint("localhost:9000");
  EXPECT_EQ(ep.host, "localhost");
  EXPECT_EQ(ep.port, 9000);
  EXPECT_THROW(parse_endpoint("localhost"), ConfigError);
  EXPECT_THROW(parse_endpoint("host:99999"), ConfigError);
  EXPECT_THROW(parse_endpoint("host:12x"), ConfigError);
  EXPECT_THROW(parse_endpoint(":80"), ConfigError);
}

TEST(DetectionAdapter, OneLineOneFrame) {
  AdapterHarness h;
  h.send(frame_line(4));
  ASSERT_TRUE(h.wait_for(1));
  const auto frames = h.frames();
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].frame_index, 4);
  EXPECT_EQ(frames[0].source_w, 640);
  EXPECT_EQ(frames[0].detections.at(0).track_id, 3);
}

TEST(DetectionAdapter, GarbageLinesAreSkippedAndCounted) {
  AdapterHarness h;
  h.send(frame_line(0) + "not json\n" + R"({"type":"frame"})" + "\n" + frame_line(1));
  ASSERT_TRUE(h.wait_for(4));
  EXPECT_EQ(h.frames().size(), 2u);
  EXPECT_EQ(h.adapter().stats().malformed, 2u);
}

TEST(DetectionAdapter, TrailingLineWithoutNewlineIsDelivered) {
  AdapterHarness h;
  std::string text = frame_line(0) + frame_line(1);
  text.pop_back();
  h.send(text);
  ASSERT_TRUE(h.wait_for(2));
  EXPECT_EQ(h.frames().size(), 2u);
}

TEST(DetectionAdapter, FrameCarriesOwnSourceSize) {
  AdapterHarness h;
  h.send(R"({"type":"frame","frame":0,"source":{"width":1920,"height":1080},"detections":[]})"
         "\n");
  ASSERT_TRUE(h.wait_for(1));
  EXPECT_EQ(h.frames().at(0).source_w, 1920);
}

TEST(DetectionAdapter, PreservesOrderOverThousandFrames) {
  AdapterHarness h;
  std::string text;
  for (int i = 0; i < 1000; ++i) text += frame_line(i);
  h.send(text);
  ASSERT_TRUE(h.wait_for(1000));
  const auto frames = h.frames();
  ASSERT_EQ(frames.size(), 1000u);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(frames[i].frame_index, i);
}

TEST(DetectionAdapter, StaleFramesAcrossConnectionsAreDropped) {
  AdapterHarness h;
  h.send(frame_line(5));
  ASSERT_TRUE(h.wait_for(1));
  h.send(frame_line(3) + frame_line(6));
  ASSERT_TRUE(h.wait_for(3));
  EXPECT_EQ(h.frames().size(), 2u);
  EXPECT_EQ(h.adapter().stats().out_of_order, 1u);
  EXPECT_EQ(h.adapter().stats().connections, 2u);
}

TEST(DetectionAdapter, BindFailureIsIoError) {
  DetectionAdapter first({"127.0.0.1", 0}, 640, 480);
  EXPECT_THROW(DetectionAdapter({"127.0.0.1", first.port()}, 640, 480), IoError);
  EXPECT_THROW(DetectionAdapter({"203.0.113.77", 0}, 640, 480), IoError);
}

}  // namespace
}  // namespace zonewatch
