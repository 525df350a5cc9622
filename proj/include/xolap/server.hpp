#pragma once

#include <memory>
#include <string>

#include "xolap/session.hpp"

namespace xolap {

/// HTTP front end over a SessionStore.
///
///   POST /sessions              multipart `facts` + `hierarchy` files, or JSON
///                               {"facts": xml, "hierarchies": [xml...]}
///   GET  /sessions/{id}/cube    current state as cells plus XML
///   POST /sessions/{id}/ops     flat operation request; If-Match: version
///   POST /sessions/{id}/undo
///   GET  /sessions/{id}/history
///   GET  /health
class HttpService {
 public:
  explicit HttpService(SessionStore& store);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xolap
