/* Copyright 2026 The reltrav Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef RELTRAV_SERVICE_HPP_
#define RELTRAV_SERVICE_HPP_

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "reltrav/core.hpp"
#include "reltrav/pairgen.hpp"

namespace reltrav {

using ServiceClock = std::chrono::steady_clock;
using ServiceTime = ServiceClock::time_point;

struct ServiceOptions {
  std::chrono::seconds lease{600};
  // Defaults to the steady clock; tests inject a manual one.
  std::function<ServiceTime()> now;
};

struct ProgressReport {
  std::size_t total = 0;
  std::size_t labeled = 0;
  std::size_t skipped = 0;
  std::size_t pending = 0;
  std::size_t leased = 0;  // pending tasks currently under a live lease
  LabelAccounting accounting;  // over labeled tasks only
  double labels_per_image = 0.0;
  std::string ToJson() const;
};

// Task pool backed by the append-only annotation store. Task states are
// rebuilt from the store on construction: a live annotation with the task's
// id marks it labeled, a skip record marks it skipped. Leases and undo history
// live in memory only. Every operation holds one mutex, so claims and
// submissions are atomic with respect to each other.
class AnnotationService {
 public:
  AnnotationService(const DatasetManifest& manifest, std::vector<PairTask> tasks,
                    std::filesystem::path store_path, ServiceOptions options = {});

  // First pending task (pairgen order) without a live lease held by another
  // session; a session that already holds a lease gets the same task back
  // with the lease renewed. kNoPendingTasks when nothing is claimable.
  PairTask NextTask(const std::string& session);

  // kUnknownTask, kInvalidLabel, kAlreadyLabeled (labeled or skipped),
  // kLeaseExpired (no live lease for this session).
  void SubmitLabel(const std::string& task_id, int t, const std::string& session);
  void Skip(const std::string& task_id, const std::string& session);

  // Retracts the session's most recent label; the task returns to pending,
  // leased again to the same session. Returns the task id.
  std::string UndoLast(const std::string& session);

  ProgressReport Progress() const;
  std::vector<PairTask> Tasks() const;
  std::optional<std::string> LeaseHolder(const std::string& task_id) const;
  const DatasetManifest& manifest() const { return manifest_; }
  std::vector<PairAnnotation> Effective() const { return store_.Effective(); }

 private:
  struct Lease {
    std::string session;
    ServiceTime expires;
  };

  ServiceTime Now() const;
  PairTask& FindTask(const std::string& task_id);
  bool LeaseLive(const std::string& task_id, ServiceTime now) const;
  void CheckSubmittable(const PairTask& task, const std::string& session);

  const DatasetManifest& manifest_;
  std::vector<PairTask> tasks_;
  std::unordered_map<std::string, std::size_t> index_;
  AnnotationStore store_;
  ServiceOptions options_;
  std::unordered_map<std::string, Lease> leases_;
  std::unordered_map<std::string, std::vector<std::string>> history_;
  mutable std::mutex mutex_;
};

// HTTP front end (JSON over HTTP/1.1):
//   GET  /api/tasks/next           -> task with image URLs
//   POST /api/tasks/{id}/label     body {"t": -1|0|1}
//   POST /api/tasks/{id}/skip
//   POST /api/undo
//   GET  /api/progress
//   GET  /api/images/{image_id}    binary PPM (8-bit RGB)
// The session comes from the X-Session header or the `session` query
// parameter ("default" when absent). Errors return {"code", "message"}.
class HttpServer {
 public:
  explicit HttpServer(AnnotationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool ListenAfterBind();
  void Stop();
  void WaitUntilReady() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status used for an error code.
int HttpStatusFor(ErrorCode code);

}  // namespace reltrav

#endif  // RELTRAV_SERVICE_HPP_
