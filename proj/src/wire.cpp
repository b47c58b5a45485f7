#include "dwmap/wire.hpp"

#include <bit>
#include <cstring>

namespace dwmap::wire {

std::string to_string(FrameErrorKind k) {
  switch (k) {
    case FrameErrorKind::Truncated: return "truncated frame";
    case FrameErrorKind::BadMagic: return "bad magic";
    case FrameErrorKind::BadVersion: return "version mismatch";
    case FrameErrorKind::Oversize: return "oversize frame";
    case FrameErrorKind::UnknownType: return "unknown message type";
    case FrameErrorKind::Malformed: return "malformed payload";
  }
  return "frame error";
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void expect_done() const {
    if (pos_ != data_.size()) {
      throw FrameError(FrameErrorKind::Malformed, "payload has trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) {
      throw FrameError(FrameErrorKind::Malformed, "payload ends early");
    }
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

void write_sparse(Writer& w, const std::vector<std::pair<std::uint32_t, double>>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& [idx, val] : v) {
    w.u32(idx);
    w.f64(val);
  }
}

std::vector<std::pair<std::uint32_t, double>> read_sparse(Reader& r) {
  const std::uint32_t n = r.u32();
  std::vector<std::pair<std::uint32_t, double>> v;
  v.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t idx = r.u32();
    const double val = r.f64();
    v.push_back({idx, val});
  }
  return v;
}

struct PayloadEncoder {
  Writer& w;

  void operator()(const Hello& m) const { w.u32(m.protocol); }

  void operator()(const EdgeData& m) const {
    w.u32(m.num_rows_total);
    w.u32(static_cast<std::uint32_t>(m.edges.size()));
    for (const EdgePricingData& e : m.edges) {
      w.u32(static_cast<std::uint32_t>(e.edge));
      w.u32(static_cast<std::uint32_t>(e.cost.size()));
      for (double c : e.cost) w.f64(c);
      w.u32(static_cast<std::uint32_t>(e.rows.size()));
      for (const EdgeBlockRow& row : e.rows) {
        w.u32(static_cast<std::uint32_t>(row.row));
        w.u32(static_cast<std::uint32_t>(row.entries.size()));
        for (const auto& [k, coeff] : row.entries) {
          w.u32(static_cast<std::uint32_t>(k));
          w.f64(coeff);
        }
      }
    }
  }

  void operator()(const PriceRequest& m) const {
    w.u32(m.iteration);
    w.u8(static_cast<std::uint8_t>(m.tie_rule));
    w.u32(static_cast<std::uint32_t>(m.edges.size()));
    for (std::uint32_t e : m.edges) w.u32(e);
    write_sparse(w, m.pi);
    write_sparse(w, m.gamma);
  }

  void operator()(const PriceReply& m) const {
    w.u32(m.iteration);
    w.u32(static_cast<std::uint32_t>(m.items.size()));
    for (const PriceReplyItem& it : m.items) {
      w.u32(it.edge);
      w.u32(it.solution_index);
      w.f64(it.cost);
      w.f64(it.reduced_cost);
      write_sparse(w, it.constraint_column);
    }
  }

  void operator()(const Shutdown&) const {}

  void operator()(const ErrorMsg& m) const {
    w.u32(m.code);
    w.u32(static_cast<std::uint32_t>(m.text.size()));
    w.bytes(m.text.data(), m.text.size());
  }
};

MsgType type_of(const Message& msg) {
  switch (msg.index()) {
    case 0: return MsgType::Hello;
    case 1: return MsgType::EdgeData;
    case 2: return MsgType::PriceRequest;
    case 3: return MsgType::PriceReply;
    case 4: return MsgType::Shutdown;
    default: return MsgType::Error;
  }
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Message& msg) {
  Writer payload;
  std::visit(PayloadEncoder{payload}, msg);
  std::vector<std::uint8_t> body = payload.take();

  Writer out;
  out.bytes(kMagic.data(), kMagic.size());
  out.u8(kVersion);
  out.u8(static_cast<std::uint8_t>(type_of(msg)));
  out.u32(static_cast<std::uint32_t>(body.size()));
  out.bytes(body.data(), body.size());
  return out.take();
}

Message decode_frame(std::span<const std::uint8_t> bytes, std::uint32_t max_payload) {
  if (bytes.size() < kHeaderSize) {
    throw FrameError(FrameErrorKind::Truncated, "frame shorter than header");
  }
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FrameError(FrameErrorKind::BadMagic, "magic mismatch");
  }
  const std::uint8_t version = bytes[8];
  if (version != kVersion) {
    throw FrameError(FrameErrorKind::BadVersion,
                     "got version " + std::to_string(static_cast<int>(version)));
  }
  const std::uint8_t type = bytes[9];
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[10 + i]) << (8 * i);
  if (len > max_payload) {
    throw FrameError(FrameErrorKind::Oversize,
                     "declared payload of " + std::to_string(len) + " bytes");
  }
  if (bytes.size() < kHeaderSize + len) {
    throw FrameError(FrameErrorKind::Truncated, "payload shorter than declared");
  }
  if (bytes.size() > kHeaderSize + len) {
    throw FrameError(FrameErrorKind::Malformed, "frame has trailing bytes");
  }
  Reader r(bytes.subspan(kHeaderSize, len));

  switch (static_cast<MsgType>(type)) {
    case MsgType::Hello: {
      Hello m;
      m.protocol = r.u32();
      r.expect_done();
      return m;
    }
    case MsgType::EdgeData: {
      EdgeData m;
      m.num_rows_total = r.u32();
      const std::uint32_t ne = r.u32();
      m.edges.resize(ne);
      for (std::uint32_t i = 0; i < ne; ++i) {
        EdgePricingData& e = m.edges[i];
        e.edge = static_cast<EdgeId>(r.u32());
        const std::uint32_t nc = r.u32();
        e.cost.resize(nc);
        for (std::uint32_t c = 0; c < nc; ++c) e.cost[c] = r.f64();
        const std::uint32_t nr = r.u32();
        e.rows.resize(nr);
        for (std::uint32_t rr = 0; rr < nr; ++rr) {
          e.rows[rr].row = static_cast<int>(r.u32());
          const std::uint32_t nnz = r.u32();
          e.rows[rr].entries.resize(nnz);
          for (std::uint32_t z = 0; z < nnz; ++z) {
            const int k = static_cast<int>(r.u32());
            const double coeff = r.f64();
            e.rows[rr].entries[z] = {k, coeff};
          }
        }
      }
      r.expect_done();
      return m;
    }
    case MsgType::PriceRequest: {
      PriceRequest m;
      m.iteration = r.u32();
      const std::uint8_t tie = r.u8();
      if (tie > 1) throw FrameError(FrameErrorKind::Malformed, "unknown tie rule");
      m.tie_rule = static_cast<TieRule>(tie);
      const std::uint32_t ne = r.u32();
      m.edges.resize(ne);
      for (std::uint32_t i = 0; i < ne; ++i) m.edges[i] = r.u32();
      m.pi = read_sparse(r);
      m.gamma = read_sparse(r);
      r.expect_done();
      return m;
    }
    case MsgType::PriceReply: {
      PriceReply m;
      m.iteration = r.u32();
      const std::uint32_t ni = r.u32();
      m.items.resize(ni);
      for (std::uint32_t i = 0; i < ni; ++i) {
        PriceReplyItem& it = m.items[i];
        it.edge = r.u32();
        it.solution_index = r.u32();
        it.cost = r.f64();
        it.reduced_cost = r.f64();
        it.constraint_column = read_sparse(r);
      }
      r.expect_done();
      return m;
    }
    case MsgType::Shutdown: {
      r.expect_done();
      return Shutdown{};
    }
    case MsgType::Error: {
      ErrorMsg m;
      m.code = r.u32();
      const std::uint32_t n = r.u32();
      m.text = r.str(n);
      r.expect_done();
      return m;
    }
    default:
      throw FrameError(FrameErrorKind::UnknownType,
                       "type byte " + std::to_string(static_cast<int>(type)));
  }
}

}  // namespace dwmap::wire
