#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dwmap/wire.hpp"

using namespace dwmap;
using namespace dwmap::wire;

namespace {

template <typename T>
T roundtrip(const T& msg) {
  const std::vector<std::uint8_t> bytes = encode_frame(Message{msg});
  const Message decoded = decode_frame(bytes);
  REQUIRE(std::holds_alternative<T>(decoded));
  return std::get<T>(decoded);
}

}  // namespace

TEST_CASE("hello round-trips") {
  const Hello out = roundtrip(Hello{7});
  CHECK(out.protocol == 7);
}

TEST_CASE("edge data round-trips with nested rows") {
  EdgeData msg;
  msg.num_rows_total = 12;
  EdgePricingData e;
  e.edge = 3;
  e.cost = {1.5, -2.25, 0.0, 1e-300};
  e.rows = {{0, {{1, 1.0}, {3, -1.0}}}, {7, {{0, 2.5}}}};
  msg.edges.push_back(e);
  const EdgeData out = roundtrip(msg);
  CHECK(out.num_rows_total == 12);
  REQUIRE(out.edges.size() == 1);
  CHECK(out.edges[0].edge == 3);
  CHECK(out.edges[0].cost == e.cost);
  REQUIRE(out.edges[0].rows.size() == 2);
  CHECK(out.edges[0].rows[0].row == 0);
  CHECK(out.edges[0].rows[0].entries == e.rows[0].entries);
  CHECK(out.edges[0].rows[1].row == 7);
}

TEST_CASE("price request round-trips with three pi entries") {
  PriceRequest req;
  req.iteration = 42;
  req.tie_rule = TieRule::MaxCost;
  req.edges = {1, 2, 5};
  req.pi = {{0, 0.25}, {4, -1.75}, {9, 3.5}};
  req.gamma = {{1, 1.0}, {2, -2.0}, {5, 0.0}};
  const PriceRequest out = roundtrip(req);
  CHECK(out.iteration == 42);
  CHECK(out.tie_rule == TieRule::MaxCost);
  CHECK(out.edges == req.edges);
  CHECK(out.pi == req.pi);
  CHECK(out.gamma == req.gamma);
}

TEST_CASE("price reply and control messages round-trip") {
  PriceReply reply;
  reply.iteration = 3;
  reply.items = {{0, 2, 1.5, 0.25, {{1, 1.0}}}, {1, 0, -0.5, 0.0, {}}};
  const PriceReply out = roundtrip(reply);
  CHECK(out.iteration == 3);
  REQUIRE(out.items.size() == 2);
  CHECK(out.items[0].solution_index == 2);
  CHECK(out.items[0].constraint_column == reply.items[0].constraint_column);

  roundtrip(Shutdown{});
  const ErrorMsg err = roundtrip(ErrorMsg{4, "edge missing"});
  CHECK(err.code == 4);
  CHECK(err.text == "edge missing");
}

TEST_CASE("random price requests survive the wire bit-exactly") {
  std::mt19937 gen(11001);
  std::uniform_real_distribution<double> val(-1e6, 1e6);
  for (int trial = 0; trial < 100; ++trial) {
    PriceRequest req;
    req.iteration = gen();
    req.tie_rule = (gen() % 2 == 0) ? TieRule::LowestIndex : TieRule::MaxCost;
    const int ne = static_cast<int>(gen() % 6);
    for (int i = 0; i < ne; ++i) req.edges.push_back(gen() % 1000);
    const int np = static_cast<int>(gen() % 10);
    for (int i = 0; i < np; ++i) req.pi.push_back({gen() % 5000, val(gen)});
    const int ng = static_cast<int>(gen() % 6);
    for (int i = 0; i < ng; ++i) req.gamma.push_back({gen() % 1000, val(gen)});
    const PriceRequest out = roundtrip(req);
    CHECK(out.edges == req.edges);
    CHECK(out.pi == req.pi);
    CHECK(out.gamma == req.gamma);
  }
}

TEST_CASE("decode rejects each malformed frame with its own error") {
  const std::vector<std::uint8_t> good = encode_frame(Message{Hello{1}});

  {
    std::vector<std::uint8_t> bad = good;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_frame(bad), doctest::Contains("magic"), FrameError);
  }
  {
    std::vector<std::uint8_t> bad = good;
    bad[8] = 99;  // version byte
    try {
      decode_frame(bad);
      FAIL("expected version error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::BadVersion);
    }
  }
  {
    std::vector<std::uint8_t> truncated(good.begin(), good.begin() + 10);
    try {
      decode_frame(truncated);
      FAIL("expected truncation error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::Truncated);
    }
  }
  {
    std::vector<std::uint8_t> short_payload = good;
    short_payload.pop_back();
    try {
      decode_frame(short_payload);
      FAIL("expected truncation error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::Truncated);
    }
  }
  {
    std::vector<std::uint8_t> bad = good;
    bad[9] = 200;  // type byte
    try {
      decode_frame(bad);
      FAIL("expected unknown-type error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::UnknownType);
    }
  }
  {
    // Declared length above the maximum payload.
    try {
      decode_frame(good, /*max_payload=*/2);
      FAIL("expected oversize error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::Oversize);
    }
  }
  {
    std::vector<std::uint8_t> trailing = good;
    trailing.push_back(0);
    try {
      decode_frame(trailing);
      FAIL("expected malformed error");
    } catch (const FrameError& err) {
      CHECK(err.kind() == FrameErrorKind::Malformed);
    }
  }
}
