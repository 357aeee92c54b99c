#ifndef SSA_SERVER_HPP
#define SSA_SERVER_HPP

#include <memory>
#include <string>

#include "ssa/engine.hpp"
#include "ssa/error.hpp"

namespace httplib {
class Server;
}

namespace ssa {

int http_status(ErrorCode code);
json error_body(const Error& e);

/// JSON HTTP front end over an Engine. Mutating routes go through the
/// engine's writer lock; reads run concurrently on published states.
class ApiServer {
public:
    explicit ApiServer(Engine& engine);
    ~ApiServer();

    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    bool listen();
    void stop();
    void wait_until_ready() const;

private:
    void routes();

    Engine& engine_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace ssa

#endif  // SSA_SERVER_HPP
