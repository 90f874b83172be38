#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "swb/session.h"

namespace swb {

// Session files in a served directory end with this suffix; the file stem is
// the routing id.
inline constexpr std::string_view kSessionSuffix = ".session.json";

// Holds one live session per id. Readers take an immutable snapshot; a
// writer copies the current snapshot, mutates the copy, saves it, and then
// publishes it. Writers on the same id are serialized.
class SessionStore {
 public:
  // Loads every "*.session.json" under dir. Throws Error(kIo / kIntegrity).
  static std::unique_ptr<SessionStore> open_directory(const std::string& dir);

  // Registers a session; path empty means no persistence.
  void add(std::string id, Session session, std::string path = {});

  std::vector<std::string> ids() const;
  // Throws Error(kUnknownId).
  std::shared_ptr<const Session> snapshot(std::string_view id) const;

  // Runs fn on a private copy and publishes it when fn returns normally.
  template <typename Fn>
  auto update(std::string_view id, Fn&& fn) {
    Slot& slot = find_slot(id);
    std::lock_guard writer(slot.writer);
    auto copy = std::make_shared<Session>(*load(slot));
    auto result = fn(*copy);
    if (!slot.path.empty()) save_session_file(*copy, slot.path);
    publish(slot, std::move(copy));
    return result;
  }

 private:
  struct Slot {
    std::string path;
    std::mutex writer;
    mutable std::mutex pointer;  // guards only the shared_ptr swap
    std::shared_ptr<const Session> current;
  };

  Slot& find_slot(std::string_view id) const;
  static std::shared_ptr<const Session> load(const Slot& slot);
  static void publish(Slot& slot, std::shared_ptr<const Session> s);

  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::multimap<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// JSON API over a SessionStore. handle() is transport-independent; serve()
/// binds it to an HTTP listener.
class Service {
 public:
  explicit Service(std::shared_ptr<SessionStore> store) : store_(std::move(store)) {}

  HttpResponse handle(const HttpRequest& request);

  // Blocks until stop() is called. Returns false if the address cannot be bound.
  bool serve(const std::string& host, int port);
  // Binds to an ephemeral port on host and returns it, or -1.
  int bind_ephemeral(const std::string& host);
  bool listen_after_bind();
  void stop();

 private:
  struct Server;
  Server& server();

  std::shared_ptr<SessionStore> store_;
  std::shared_ptr<Server> server_;
};

// "host:port", ":port" or "port". Throws Error(kConfig).
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace swb
