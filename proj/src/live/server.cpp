#include "branchscore/live/server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <csignal>
#include <optional>
#include <deque>
#include <mutex>
#include <ostream>
#include <set>

namespace branchscore::live {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
using Frame = std::shared_ptr<const std::string>;

struct Connection;

struct Server::Impl {
  Impl(Session &s, ServerOptions o, std::ostream &l, std::atomic<std::uint64_t> &ov)
      : session(s), options(std::move(o)), log(l), overruns(ov), acceptor(ioc) {}

  Session &session;
  ServerOptions options;
  std::ostream &log;
  std::atomic<std::uint64_t> &overruns;
  std::mutex log_mu;

  asio::io_context ioc;
  tcp::acceptor acceptor;
  std::optional<asio::signal_set> signals;
  std::set<std::shared_ptr<Connection>> conns; // network thread only
  std::atomic<std::size_t> conn_count{0};

  std::thread net, ticker;
  std::mutex mu;
  std::condition_variable cv;
  bool running = false;
  bool stopped = false;

  void say(const std::string &line) {
    std::lock_guard lock(log_mu);
    log << line << '\n' << std::flush;
  }

  void accept();
  void tick_loop();
  void publish(Session::Output out);
};

struct Connection : std::enable_shared_from_this<Connection> {
  Connection(tcp::socket socket, Server::Impl &owner) : ws(std::move(socket)), impl(owner) {}

  websocket::stream<beast::tcp_stream> ws;
  Server::Impl &impl;
  beast::flat_buffer buffer;
  std::deque<Frame> queue;
  bool writing = false;
  bool closed = false;
  bool subscribed = false;

  void run() {
    ws.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws.async_accept([self = shared_from_this()](beast::error_code ec) { self->on_accept(ec); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) {
      closed = true;
      return;
    }
    impl.conns.insert(shared_from_this());
    impl.conn_count = impl.conns.size();
    send(std::make_shared<const std::string>(impl.session.hello()));
    read();
  }

  void read() {
    ws.async_read(buffer, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->on_read(ec);
    });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    const auto text = beast::buffers_to_string(buffer.data());
    buffer.consume(buffer.size());
    auto reply = impl.session.handle(text);
    if (reply.subscribe)
      subscribed = true;
    if (reply.unsubscribe)
      subscribed = false;
    for (auto &m : reply.to_sender)
      send(std::make_shared<const std::string>(std::move(m)));
    if (!closed)
      read();
  }

  void send(Frame f) {
    if (closed)
      return;
    if (queue.size() >= impl.options.max_queue) {
      impl.say("dropping slow client: " + std::to_string(queue.size()) + " frames queued");
      close();
      return;
    }
    queue.push_back(std::move(f));
    if (!writing)
      write();
  }

  void write() {
    writing = true;
    ws.text(true);
    ws.async_write(asio::buffer(*queue.front()),
                   [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_write(ec); });
  }

  void on_write(beast::error_code ec) {
    writing = false;
    if (ec) {
      close();
      return;
    }
    queue.pop_front();
    if (!queue.empty() && !closed)
      write();
  }

  void close() {
    if (closed)
      return;
    closed = true;
    queue.clear();
    beast::error_code ignored;
    beast::get_lowest_layer(ws).socket().shutdown(tcp::socket::shutdown_both, ignored);
    beast::get_lowest_layer(ws).socket().close(ignored);
    impl.conns.erase(shared_from_this());
    impl.conn_count = impl.conns.size();
  }
};

void Server::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec)
      return;
    std::make_shared<Connection>(std::move(socket), *this)->run();
    accept();
  });
}

void Server::Impl::publish(Session::Output out) {
  if (out.to_all.empty() && out.to_subscribers.empty())
    return;
  auto all = std::make_shared<std::vector<Frame>>();
  auto subs = std::make_shared<std::vector<Frame>>();
  for (auto &m : out.to_all)
    all->push_back(std::make_shared<const std::string>(std::move(m)));
  for (auto &m : out.to_subscribers)
    subs->push_back(std::make_shared<const std::string>(std::move(m)));
  asio::post(ioc, [this, all, subs] {
    // Copy: send() may drop a connection and mutate the set.
    auto targets = conns;
    for (const auto &c : targets) {
      for (const auto &f : *all)
        c->send(f);
      if (c->subscribed)
        for (const auto &f : *subs)
          c->send(f);
    }
  });
}

void Server::Impl::tick_loop() {
  using clock = std::chrono::steady_clock;
  auto next = clock::now();
  std::unique_lock lock(mu);
  while (running) {
    lock.unlock();
    auto out = session.boundary();
    const bool stepped = out.stepped;
    const auto us = out.compute_us;
    publish(std::move(out));
    lock.lock();
    if (stepped) {
      const auto period = session.tick_period();
      if (us > std::chrono::duration_cast<std::chrono::microseconds>(period).count()) {
        ++overruns;
        say("overrun at unit " + std::to_string(session.unit() - 1) + ": " + std::to_string(us) + " us > " +
            std::to_string(period.count()) + " ms");
      }
      next += period;
      // Late ticks run back to back; units are never skipped.
      cv.wait_until(lock, next, [this] { return !running; });
    } else {
      cv.wait_for(lock, std::chrono::milliseconds(2), [this] { return !running; });
      next = clock::now();
    }
  }
}

Server::Server(Session &session, ServerOptions options, std::ostream &log)
    : impl_(std::make_unique<Impl>(session, std::move(options), log, overruns_)) {
  auto &a = impl_->acceptor;
  beast::error_code ec;
  auto fail = [&](const char *what) {
    throw std::system_error(std::error_code(ec.value(), std::system_category()), what);
  };
  const auto addr = asio::ip::make_address(impl_->options.address, ec);
  if (ec)
    fail("bad listen address");
  const tcp::endpoint ep(addr, impl_->options.port);
  if (a.open(ep.protocol(), ec); ec)
    fail("open");
  a.set_option(asio::socket_base::reuse_address(true), ec);
  if (a.bind(ep, ec); ec)
    fail("bind");
  if (a.listen(asio::socket_base::max_listen_connections, ec); ec)
    fail("listen");
}

Server::~Server() { stop(); }

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

std::size_t Server::connections() const { return impl_->conn_count.load(); }

void Server::start() {
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->running)
      return;
    impl_->running = true;
  }
  impl_->accept();
  if (impl_->options.handle_signals) {
    impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int) {
      if (!ec) {
        std::lock_guard lock(impl_->mu);
        impl_->running = false;
        impl_->cv.notify_all();
      }
    });
  }
  impl_->net = std::thread([this] { impl_->ioc.run(); });
  impl_->ticker = std::thread([this] { impl_->tick_loop(); });
}

void Server::wait() {
  std::unique_lock lock(impl_->mu);
  impl_->cv.wait(lock, [this] { return impl_->stopped || !impl_->running; });
}

void Server::stop() {
  {
    std::lock_guard lock(impl_->mu);
    if (!impl_->running && !impl_->net.joinable())
      return;
    impl_->running = false;
  }
  impl_->cv.notify_all();
  if (impl_->ticker.joinable() && impl_->ticker.get_id() != std::this_thread::get_id())
    impl_->ticker.join();
  asio::post(impl_->ioc, [this] {
    beast::error_code ignored;
    impl_->acceptor.close(ignored);
    impl_->signals.reset();
    auto conns = impl_->conns;
    for (const auto &c : conns)
      c->close();
    impl_->ioc.stop();
  });
  if (impl_->net.joinable() && impl_->net.get_id() != std::this_thread::get_id())
    impl_->net.join();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopped = true;
  }
  impl_->cv.notify_all();
}

} // namespace branchscore::live
