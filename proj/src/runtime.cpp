#include "dwmap/runtime.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <map>
#include <set>
#include <thread>

namespace dwmap {

WorkPartition partition_edges(const std::vector<EdgePricingData>& data, int workers) {
  if (workers < 1) throw std::invalid_argument("need at least one worker");
  WorkPartition out;
  out.edges_per_worker.resize(static_cast<std::size_t>(workers));
  const std::size_t n = data.size();
  double total = 0.0;
  for (const EdgePricingData& d : data) total += static_cast<double>(d.cost.size());
  double cum = 0.0;
  std::size_t i = 0;
  for (int w = 0; w < workers; ++w) {
    const double cut = total * static_cast<double>(w + 1) / workers;
    while (i < n && (cum < cut || w == workers - 1)) {
      cum += static_cast<double>(data[i].cost.size());
      out.edges_per_worker[w].push_back(static_cast<EdgeId>(i));
      ++i;
      if (cum >= cut && w < workers - 1) break;
    }
  }
  while (i < n) out.edges_per_worker.back().push_back(static_cast<EdgeId>(i++));
  return out;
}

ThreadPoolPricer::ThreadPoolPricer(const std::vector<EdgePricingData>& data, int workers)
    : data_(data), partition_(partition_edges(data, workers)) {}

std::vector<Candidate> ThreadPoolPricer::price_all(const Duals& duals, TieRule rule) {
  std::vector<Candidate> out(data_.size());
  std::vector<std::exception_ptr> errors(partition_.edges_per_worker.size());
  std::vector<std::thread> threads;
  threads.reserve(partition_.edges_per_worker.size());
  for (std::size_t w = 0; w < partition_.edges_per_worker.size(); ++w) {
    threads.emplace_back([&, w] {
      try {
        for (EdgeId e : partition_.edges_per_worker[w]) {
          out[e] = price_subprogram(data_[e], duals.pi, duals.gamma[e], rule);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sockets

FramedSocket::~FramedSocket() { close(); }

FramedSocket::FramedSocket(FramedSocket&& other) noexcept
    : fd_(other.fd_), tx_(other.tx_), rx_(other.rx_) {
  other.fd_ = -1;
}

void FramedSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void FramedSocket::send(const wire::Message& msg) {
  if (fd_ < 0) throw SocketError("send on closed socket");
  const std::vector<std::uint8_t> frame = wire::encode_frame(msg);
  std::size_t sent = 0;
  while (sent < frame.size()) {
    const ssize_t n = ::send(fd_, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      close();
      throw SocketError(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
    tx_ += static_cast<std::uint64_t>(n);
  }
}

wire::Message FramedSocket::receive(std::uint32_t max_payload) {
  if (fd_ < 0) throw SocketError("receive on closed socket");
  auto read_exact = [&](std::uint8_t* buf, std::size_t want) {
    std::size_t got = 0;
    while (got < want) {
      const ssize_t n = ::recv(fd_, buf + got, want - got, 0);
      if (n == 0) {
        close();
        throw SocketError("peer closed the connection");
      }
      if (n < 0) {
        if (errno == EINTR) continue;
        close();
        throw SocketError(std::string("recv failed: ") + std::strerror(errno));
      }
      got += static_cast<std::size_t>(n);
      rx_ += static_cast<std::uint64_t>(n);
    }
  };

  std::vector<std::uint8_t> frame(wire::kHeaderSize);
  read_exact(frame.data(), wire::kHeaderSize);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(frame[10 + i]) << (8 * i);
  if (len > max_payload) {
    close();
    throw wire::FrameError(wire::FrameErrorKind::Oversize,
                           "declared payload of " + std::to_string(len) + " bytes");
  }
  frame.resize(wire::kHeaderSize + len);
  read_exact(frame.data() + wire::kHeaderSize, len);
  return wire::decode_frame(frame, max_payload);
}

namespace {

int make_listener(const std::string& host, int port, int backlog) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SocketError("socket() failed");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw SocketError("bad listen address: " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw SocketError(std::string("bind failed: ") + std::strerror(errno));
  }
  if (::listen(fd, backlog) != 0) {
    ::close(fd);
    throw SocketError(std::string("listen failed: ") + std::strerror(errno));
  }
  return fd;
}

int bound_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw SocketError("getsockname failed");
  }
  return ntohs(addr.sin_port);
}

int connect_to(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw SocketError("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw SocketError("bad address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw SocketError(std::string("connect failed: ") + std::strerror(errno));
  }
  return fd;
}

std::vector<int> rows_touching(const std::vector<EdgePricingData>& data,
                               const std::vector<EdgeId>& edges) {
  std::set<int> rows;
  for (EdgeId e : edges) {
    for (const EdgeBlockRow& br : data[e].rows) rows.insert(br.row);
  }
  return {rows.begin(), rows.end()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Coordinator

RemoteCoordinatorPricer::RemoteCoordinatorPricer(const std::vector<EdgePricingData>& data,
                                                 int num_rows_total, RemotePricerOptions opts)
    : data_(data), num_rows_total_(num_rows_total), opts_(std::move(opts)) {
  if (opts_.expected_workers < 1) throw std::invalid_argument("need at least one worker");
  listen_fd_ = make_listener(opts_.host, opts_.port, opts_.expected_workers);
  port_ = bound_port(listen_fd_);
}

RemoteCoordinatorPricer::~RemoteCoordinatorPricer() {
  try {
    shutdown_workers();
  } catch (...) {
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void RemoteCoordinatorPricer::wait_for_workers() {
  const WorkPartition partition = partition_edges(data_, opts_.expected_workers);
  workers_.clear();
  for (int w = 0; w < opts_.expected_workers; ++w) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) throw SocketError(std::string("accept failed: ") + std::strerror(errno));
    timeval tv{};
    tv.tv_sec = opts_.receive_timeout_sec;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    WorkerSlot slot;
    slot.conn = std::make_unique<FramedSocket>(fd);
    const wire::Message hello = slot.conn->receive();
    if (!std::holds_alternative<wire::Hello>(hello)) {
      throw SocketError("worker did not start with HELLO");
    }
    slot.conn->send(wire::Hello{});
    workers_.push_back(std::move(slot));
  }
  for (int w = 0; w < opts_.expected_workers; ++w) {
    ship_edges(workers_[w], partition.edges_per_worker[w]);
  }
}

void RemoteCoordinatorPricer::ship_edges(WorkerSlot& w, const std::vector<EdgeId>& edges) {
  wire::EdgeData msg;
  msg.num_rows_total = static_cast<std::uint32_t>(num_rows_total_);
  for (EdgeId e : edges) msg.edges.push_back(data_[e]);
  w.conn->send(msg);
  w.edges.insert(w.edges.end(), edges.begin(), edges.end());
  std::sort(w.edges.begin(), w.edges.end());
  w.edges.erase(std::unique(w.edges.begin(), w.edges.end()), w.edges.end());
}

void RemoteCoordinatorPricer::shutdown_workers() {
  for (WorkerSlot& w : workers_) {
    if (w.conn && w.conn->open()) {
      try {
        w.conn->send(wire::Shutdown{});
      } catch (...) {
      }
      w.conn->close();
    }
  }
}

int RemoteCoordinatorPricer::live_workers() const {
  int n = 0;
  for (const WorkerSlot& w : workers_) n += (w.conn && w.conn->open()) ? 1 : 0;
  return n;
}

bool RemoteCoordinatorPricer::send_request(WorkerSlot& w, const std::vector<EdgeId>& edges,
                                           const Duals& duals, TieRule rule) {
  if (!w.conn || !w.conn->open()) return false;
  try {
    wire::PriceRequest req;
    req.iteration = iteration_;
    req.tie_rule = rule;
    for (EdgeId e : edges) req.edges.push_back(static_cast<std::uint32_t>(e));
    // pi restricted to rows touching this worker's edges; gamma restricted
    // to its edges. This is the whole per-iteration payload.
    const std::vector<int> rows = rows_touching(data_, edges);
    for (int r : rows) req.pi.push_back({static_cast<std::uint32_t>(r), duals.pi[r]});
    for (EdgeId e : edges) {
      req.gamma.push_back({static_cast<std::uint32_t>(e), duals.gamma[e]});
    }
    w.conn->send(req);
    return true;
  } catch (const std::exception&) {
    if (w.conn) w.conn->close();
    return false;
  }
}

bool RemoteCoordinatorPricer::collect_reply(WorkerSlot& w, const std::vector<EdgeId>& edges,
                                            std::vector<Candidate>& out) {
  if (!w.conn || !w.conn->open()) return false;
  try {
    const wire::Message reply = w.conn->receive();
    const auto* pr = std::get_if<wire::PriceReply>(&reply);
    if (pr == nullptr || pr->iteration != iteration_ || pr->items.size() != edges.size()) {
      throw SocketError("bad pricing reply");
    }
    for (std::size_t i = 0; i < pr->items.size(); ++i) {
      const wire::PriceReplyItem& it = pr->items[i];
      if (static_cast<EdgeId>(it.edge) != edges[i]) throw SocketError("reply edge mismatch");
      Candidate c;
      c.column.edge = static_cast<EdgeId>(it.edge);
      c.column.solution_index = static_cast<int>(it.solution_index);
      c.column.cost = it.cost;
      c.reduced_cost = it.reduced_cost;
      c.column.constraint_column.reserve(it.constraint_column.size());
      for (const auto& [r, v] : it.constraint_column) {
        c.column.constraint_column.push_back({static_cast<int>(r), v});
      }
      out[c.column.edge] = std::move(c);
    }
    return true;
  } catch (const std::exception&) {
    if (w.conn) w.conn->close();
    return false;
  }
}

std::vector<Candidate> RemoteCoordinatorPricer::price_all(const Duals& duals, TieRule rule) {
  if (workers_.empty()) wait_for_workers();
  ++iteration_;
  std::uint64_t tx0 = 0, rx0 = 0;
  for (const WorkerSlot& w : workers_) {
    if (w.conn) {
      tx0 += w.conn->bytes_sent();
      rx0 += w.conn->bytes_received();
    }
  }

  std::vector<Candidate> out(data_.size());
  std::vector<std::vector<EdgeId>> unpriced;
  // All requests go out before any reply is awaited, so workers price their
  // blocks concurrently.
  std::vector<char> in_flight(workers_.size(), 0);
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    WorkerSlot& w = workers_[i];
    if (w.edges.empty()) continue;
    if (send_request(w, w.edges, duals, rule)) {
      in_flight[i] = 1;
    } else {
      unpriced.push_back(w.edges);
      w.edges.clear();
    }
  }
  for (std::size_t i = 0; i < workers_.size(); ++i) {
    if (!in_flight[i]) continue;
    WorkerSlot& w = workers_[i];
    if (!collect_reply(w, w.edges, out)) {
      unpriced.push_back(w.edges);
      w.edges.clear();
    }
  }
  // Failed workers: re-ship their edges to a live worker and retry there.
  while (!unpriced.empty()) {
    std::vector<EdgeId> edges = std::move(unpriced.back());
    unpriced.pop_back();
    bool placed = false;
    for (WorkerSlot& w : workers_) {
      if (!w.conn || !w.conn->open()) continue;
      try {
        ship_edges(w, edges);
      } catch (const std::exception&) {
        w.conn->close();
        continue;
      }
      if (send_request(w, edges, duals, rule) && collect_reply(w, edges, out)) {
        placed = true;
        break;
      }
      // This worker died too; its whole edge set needs a new home.
      unpriced.push_back(w.edges);
      w.edges.clear();
    }
    if (!placed) {
      throw SocketError("no live worker can price " + std::to_string(edges.size()) + " edges");
    }
  }

  std::uint64_t tx1 = 0, rx1 = 0;
  for (const WorkerSlot& w : workers_) {
    if (w.conn) {
      tx1 += w.conn->bytes_sent();
      rx1 += w.conn->bytes_received();
    }
  }
  last_tx_ = tx1 - tx0;
  last_rx_ = rx1 - rx0;
  return out;
}

// ---------------------------------------------------------------------------
// Worker

void run_worker(const std::string& host, int port) {
  FramedSocket conn(connect_to(host, port));
  conn.send(wire::Hello{});
  const wire::Message hello = conn.receive();
  if (!std::holds_alternative<wire::Hello>(hello)) {
    throw SocketError("coordinator did not reply with HELLO");
  }

  std::map<EdgeId, EdgePricingData> local;
  int num_rows = 0;
  while (true) {
    wire::Message msg = conn.receive();
    if (std::holds_alternative<wire::Shutdown>(msg)) return;
    if (const auto* err = std::get_if<wire::ErrorMsg>(&msg)) {
      throw SocketError("coordinator error " + std::to_string(err->code) + ": " + err->text);
    }
    if (auto* data = std::get_if<wire::EdgeData>(&msg)) {
      num_rows = std::max(num_rows, static_cast<int>(data->num_rows_total));
      for (EdgePricingData& e : data->edges) local[e.edge] = std::move(e);
      continue;
    }
    const auto* req = std::get_if<wire::PriceRequest>(&msg);
    if (req == nullptr) {
      conn.send(wire::ErrorMsg{1, "unexpected message"});
      throw SocketError("unexpected message from coordinator");
    }
    std::vector<double> pi(static_cast<std::size_t>(num_rows), 0.0);
    for (const auto& [row, value] : req->pi) {
      if (row >= pi.size()) {
        conn.send(wire::ErrorMsg{2, "pi row out of range"});
        throw SocketError("pi row out of range");
      }
      pi[row] = value;
    }
    std::map<EdgeId, double> gamma;
    for (const auto& [edge, value] : req->gamma) gamma[static_cast<EdgeId>(edge)] = value;

    wire::PriceReply reply;
    reply.iteration = req->iteration;
    for (std::uint32_t edge : req->edges) {
      const auto it = local.find(static_cast<EdgeId>(edge));
      const auto git = gamma.find(static_cast<EdgeId>(edge));
      if (it == local.end() || git == gamma.end()) {
        conn.send(wire::ErrorMsg{3, "edge " + std::to_string(edge) + " not on this worker"});
        throw SocketError("request for unshipped edge");
      }
      const Candidate cand = price_subprogram(it->second, pi, git->second, req->tie_rule);
      wire::PriceReplyItem item;
      item.edge = edge;
      item.solution_index = static_cast<std::uint32_t>(cand.column.solution_index);
      item.cost = cand.column.cost;
      item.reduced_cost = cand.reduced_cost;
      for (const auto& [r, v] : cand.column.constraint_column) {
        item.constraint_column.push_back({static_cast<std::uint32_t>(r), v});
      }
      reply.items.push_back(std::move(item));
    }
    conn.send(reply);
  }
}

std::pair<std::string, int> parse_endpoint(const std::string& endpoint) {
  const std::size_t colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw std::invalid_argument("expected host:port, got '" + endpoint + "'");
  }
  const std::string host = endpoint.substr(0, colon);
  const int port = std::stoi(endpoint.substr(colon + 1));
  if (port < 1 || port > 65535) throw std::invalid_argument("port out of range");
  return {host, port};
}

}  // namespace dwmap
