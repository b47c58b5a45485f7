#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dwmap/decomposition.hpp"
#include "dwmap/wire.hpp"

namespace dwmap {

// Assignment of edges to workers: contiguous edge-id blocks balanced by
// total state-space size. Blocks may be empty when workers outnumber edges.
struct WorkPartition {
  std::vector<std::vector<EdgeId>> edges_per_worker;
};

WorkPartition partition_edges(const std::vector<EdgePricingData>& data, int workers);

// Data-parallel in-process pricing over an immutable duals snapshot.
// Results are merged in edge-id order, bit-identical to serial pricing.
class ThreadPoolPricer : public Pricer {
 public:
  ThreadPoolPricer(const std::vector<EdgePricingData>& data, int workers);
  std::vector<Candidate> price_all(const Duals& duals, TieRule rule) override;

 private:
  const std::vector<EdgePricingData>& data_;
  WorkPartition partition_;
};

class SocketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Blocking length-framed stream with byte counters.
class FramedSocket {
 public:
  explicit FramedSocket(int fd) : fd_(fd) {}
  ~FramedSocket();
  FramedSocket(const FramedSocket&) = delete;
  FramedSocket& operator=(const FramedSocket&) = delete;
  FramedSocket(FramedSocket&& other) noexcept;
  FramedSocket& operator=(FramedSocket&&) = delete;

  void send(const wire::Message& msg);
  wire::Message receive(std::uint32_t max_payload = wire::kDefaultMaxPayload);
  void close();
  bool open() const { return fd_ >= 0; }

  std::uint64_t bytes_sent() const { return tx_; }
  std::uint64_t bytes_received() const { return rx_; }

 private:
  int fd_ = -1;
  std::uint64_t tx_ = 0;
  std::uint64_t rx_ = 0;
};

struct RemotePricerOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks an ephemeral port; see port()
  int expected_workers = 1;
  int receive_timeout_sec = 120;
};

// Coordinator side of distributed pricing. Listens for worker connections,
// ships each worker its edge block once, then runs one request/reply round
// per pricing call. A failed worker is retired; its edges are re-shipped to
// a live worker and re-priced.
class RemoteCoordinatorPricer : public Pricer {
 public:
  RemoteCoordinatorPricer(const std::vector<EdgePricingData>& data, int num_rows_total,
                          RemotePricerOptions opts);
  ~RemoteCoordinatorPricer() override;

  int port() const { return port_; }
  // Accepts connections and ships edge data; blocks until every expected
  // worker is ready.
  void wait_for_workers();
  void shutdown_workers();

  std::vector<Candidate> price_all(const Duals& duals, TieRule rule) override;
  std::uint64_t last_bytes_sent() const override { return last_tx_; }
  std::uint64_t last_bytes_received() const override { return last_rx_; }
  int live_workers() const;

 private:
  struct WorkerSlot {
    std::unique_ptr<FramedSocket> conn;
    std::vector<EdgeId> edges;
  };

  void ship_edges(WorkerSlot& w, const std::vector<EdgeId>& edges);
  bool send_request(WorkerSlot& w, const std::vector<EdgeId>& edges, const Duals& duals,
                    TieRule rule);
  bool collect_reply(WorkerSlot& w, const std::vector<EdgeId>& edges,
                     std::vector<Candidate>& out);

  const std::vector<EdgePricingData>& data_;
  int num_rows_total_ = 0;
  RemotePricerOptions opts_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::uint32_t iteration_ = 0;
  std::vector<WorkerSlot> workers_;
  std::uint64_t last_tx_ = 0;
  std::uint64_t last_rx_ = 0;
};

// Worker side: connects to the coordinator and serves pricing requests until
// shutdown. Blocks for the lifetime of the connection.
void run_worker(const std::string& host, int port);

// Parses "host:port".
std::pair<std::string, int> parse_endpoint(const std::string& endpoint);

}  // namespace dwmap
