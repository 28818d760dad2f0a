// Registry daemon: accepts signed manifests over HTTP, appends each accepted
// manifest id to a transparency log, and serves lookups and log proofs. All
// request handling lives in the library; this file wires configuration,
// binds the socket and waits for a signal.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "vamp/certificate.hpp"
#include "vamp/errors.hpp"
#include "vamp/keys.hpp"
#include "vamp/registry.hpp"

namespace {

using namespace vamp;
namespace fs = std::filesystem;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"manifest registry with a transparency log"};

  std::string addr = env_or("VAMP_REGISTRY_ADDR", "127.0.0.1:8088");
  std::string dataDir = env_or("VAMP_DATA_DIR", "registry-data");
  std::string trustDir = env_or("VAMP_TRUST_DIR", "");
  std::string logKey = env_or("VAMP_LOG_KEY", "");

  app.add_option("--addr", addr, "listen address host:port (port 0 picks a free port)")
      ->capture_default_str();
  app.add_option("--data-dir", dataDir, "directory for manifests and the log")
      ->capture_default_str();
  app.add_option("--trust-dir", trustDir, "trust anchor directory (default $VAMP_TRUST_DIR)");
  app.add_option("--log-key", logKey,
                 "log signing key; generated there if absent (default <data-dir>/log.key)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (trustDir.empty()) {
      std::cerr << "error: no trust directory configured; pass --trust-dir or set "
                   "VAMP_TRUST_DIR\n";
      return 3;
    }
    if (!fs::is_directory(trustDir)) {
      std::cerr << "error: trust directory " << trustDir << " does not exist\n";
      return 3;
    }
    TrustStore trust = TrustStore::from_directory(trustDir);

    fs::create_directories(dataDir);
    fs::path keyPath = logKey.empty() ? fs::path(dataDir) / "log.key" : fs::path(logKey);
    PrivateKey key = [&] {
      if (fs::exists(keyPath)) return PrivateKey::load(keyPath);
      PrivateKey fresh = PrivateKey::generate(SignatureAlgorithm::ed25519);
      fresh.save(keyPath);
      std::cout << "generated log key at " << keyPath.string() << std::endl;
      return fresh;
    }();

    RegistryService service(dataDir, std::move(trust), std::move(key));

    std::string hostPort = addr;
    if (auto scheme = hostPort.find("://"); scheme != std::string::npos)
      hostPort = hostPort.substr(scheme + 3);
    auto colon = hostPort.rfind(':');
    std::string host = colon == std::string::npos || colon == 0 ? std::string("127.0.0.1")
                                                                : hostPort.substr(0, colon);
    int port = colon == std::string::npos
                   ? 8088
                   : static_cast<int>(std::stoul(hostPort.substr(colon + 1)));

    httplib::Server server;
    service.attach(server);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    if (port == 0) {
      port = server.bind_to_any_port(host);
      if (port < 0) raise(Errc::io, "cannot bind to " + host);
    } else if (!server.bind_to_port(host, port)) {
      raise(Errc::io, "cannot bind to " + host + ":" + std::to_string(port));
    }

    std::cout << "registry data in " << fs::absolute(dataDir).string() << ", log size "
              << service.size() << std::endl;
    std::cout << "listening on http://" << host << ":" << port << std::endl;
    server.listen_after_bind();
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
