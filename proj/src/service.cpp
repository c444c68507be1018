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
#include "reltrav/service.hpp"

#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "reltrav/image.hpp"

namespace reltrav {

using json = nlohmann::ordered_json;

std::string ProgressReport::ToJson() const {
  return json{{"total", total},
              {"labeled", labeled},
              {"skipped", skipped},
              {"pending", pending},
              {"leased", leased},
              {"images", accounting.images},
              {"labeled_intra", accounting.intra},
              {"labeled_cross", accounting.cross},
              {"accounted_labels", accounting.accounted_labels},
              {"labels_per_image", labels_per_image}}
      .dump();
}

AnnotationService::AnnotationService(const DatasetManifest& manifest, std::vector<PairTask> tasks,
                                     std::filesystem::path store_path, ServiceOptions options)
    : manifest_(manifest),
      tasks_(std::move(tasks)),
      store_(std::move(store_path)),
      options_(std::move(options)) {
  for (std::size_t i = 0; i < tasks_.size(); ++i) {
    if (!index_.emplace(tasks_[i].task_id, i).second) {
      throw Error(ErrorCode::kDuplicatePairId, "duplicate task id '" + tasks_[i].task_id + "'");
    }
    tasks_[i].status = TaskStatus::kPending;
  }
  const std::vector<StoreRecord> records = store_.Records();
  std::unordered_set<std::string> skipped;
  for (const StoreRecord& r : records) {
    if (r.type == StoreRecord::Type::kSkip) skipped.insert(r.pair_id);
  }
  for (const std::string& id : skipped) {
    if (auto it = index_.find(id); it != index_.end()) tasks_[it->second].status = TaskStatus::kSkipped;
  }
  for (const PairAnnotation& a : ResolveRecords(records)) {
    if (auto it = index_.find(a.pair_id); it != index_.end()) {
      tasks_[it->second].status = TaskStatus::kLabeled;
    }
  }
}

ServiceTime AnnotationService::Now() const {
  return options_.now ? options_.now() : ServiceClock::now();
}

PairTask& AnnotationService::FindTask(const std::string& task_id) {
  auto it = index_.find(task_id);
  if (it == index_.end()) throw Error(ErrorCode::kUnknownTask, "unknown task '" + task_id + "'");
  return tasks_[it->second];
}

bool AnnotationService::LeaseLive(const std::string& task_id, ServiceTime now) const {
  auto it = leases_.find(task_id);
  return it != leases_.end() && now < it->second.expires;
}

PairTask AnnotationService::NextTask(const std::string& session) {
  std::lock_guard lock(mutex_);
  const ServiceTime now = Now();
  for (PairTask& task : tasks_) {
    if (task.status != TaskStatus::kPending) continue;
    auto it = leases_.find(task.task_id);
    if (it != leases_.end() && it->second.session == session && now < it->second.expires) {
      it->second.expires = now + options_.lease;
      return task;
    }
  }
  for (PairTask& task : tasks_) {
    if (task.status != TaskStatus::kPending || LeaseLive(task.task_id, now)) continue;
    leases_[task.task_id] = Lease{session, now + options_.lease};
    return task;
  }
  throw Error(ErrorCode::kNoPendingTasks, "no pending tasks");
}

void AnnotationService::CheckSubmittable(const PairTask& task, const std::string& session) {
  if (task.status != TaskStatus::kPending) {
    throw Error(ErrorCode::kAlreadyLabeled, "task '" + task.task_id + "' is already " +
                                                std::string(TaskStatusName(task.status)));
  }
  auto it = leases_.find(task.task_id);
  if (it == leases_.end() || it->second.session != session || !(Now() < it->second.expires)) {
    throw Error(ErrorCode::kLeaseExpired,
                "session '" + session + "' holds no live lease on '" + task.task_id + "'");
  }
}

void AnnotationService::SubmitLabel(const std::string& task_id, int t, const std::string& session) {
  std::lock_guard lock(mutex_);
  PairTask& task = FindTask(task_id);
  if (t < -1 || t > 1) throw Error(ErrorCode::kInvalidLabel, "t must be -1, 0 or 1");
  CheckSubmittable(task, session);
  PairAnnotation ann;
  ann.pair_id = task.task_id;
  ann.a = task.a;
  ann.b = task.b;
  ann.t = t;
  ann.kind = task.kind;
  ann.source = LabelSource::kHuman;
  store_.Append(ann, manifest_);
  task.status = TaskStatus::kLabeled;
  leases_.erase(task.task_id);
  history_[session].push_back(task.task_id);
}

void AnnotationService::Skip(const std::string& task_id, const std::string& session) {
  std::lock_guard lock(mutex_);
  PairTask& task = FindTask(task_id);
  CheckSubmittable(task, session);
  store_.MarkSkipped(task.task_id);
  task.status = TaskStatus::kSkipped;
  leases_.erase(task.task_id);
}

std::string AnnotationService::UndoLast(const std::string& session) {
  std::lock_guard lock(mutex_);
  std::vector<std::string>& stack = history_[session];
  while (!stack.empty()) {
    const std::string id = stack.back();
    stack.pop_back();
    PairTask& task = FindTask(id);
    if (task.status != TaskStatus::kLabeled) continue;
    store_.Retract(id);
    task.status = TaskStatus::kPending;
    leases_[id] = Lease{session, Now() + options_.lease};
    return id;
  }
  throw Error(ErrorCode::kNothingToUndo, "session '" + session + "' has nothing to undo");
}

ProgressReport AnnotationService::Progress() const {
  std::lock_guard lock(mutex_);
  ProgressReport p;
  p.total = tasks_.size();
  const ServiceTime now = Now();
  std::size_t intra = 0;
  std::size_t cross = 0;
  for (const PairTask& task : tasks_) {
    switch (task.status) {
      case TaskStatus::kLabeled:
        ++p.labeled;
        ++(task.kind == PairKind::kIntra ? intra : cross);
        break;
      case TaskStatus::kSkipped:
        ++p.skipped;
        break;
      case TaskStatus::kPending:
        ++p.pending;
        p.leased += LeaseLive(task.task_id, now);
        break;
    }
  }
  p.accounting = AccountLabels(manifest_.size(), intra, cross);
  if (manifest_.size() > 0) {
    p.labels_per_image = static_cast<double>(intra) + static_cast<double>(cross) / 2.0;
    p.labels_per_image /= static_cast<double>(manifest_.size());
  }
  return p;
}

std::vector<PairTask> AnnotationService::Tasks() const {
  std::lock_guard lock(mutex_);
  return tasks_;
}

std::optional<std::string> AnnotationService::LeaseHolder(const std::string& task_id) const {
  std::lock_guard lock(mutex_);
  if (!LeaseLive(task_id, Now())) return std::nullopt;
  return leases_.at(task_id).session;
}

// --- HTTP -------------------------------------------------------------------------

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownTask:
    case ErrorCode::kUnknownImageId:
    case ErrorCode::kNoPendingTasks:
      return 404;
    case ErrorCode::kLeaseExpired:
    case ErrorCode::kAlreadyLabeled:
    case ErrorCode::kNothingToUndo:
    case ErrorCode::kDuplicatePairId:
      return 409;
    case ErrorCode::kIo:
      return 500;
    default:
      return 400;
  }
}

struct HttpServer::Impl {
  AnnotationService& service;
  httplib::Server server;
};

namespace {

std::string SessionOf(const httplib::Request& req) {
  if (req.has_header("X-Session")) return req.get_header_value("X-Session");
  if (req.has_param("session")) return req.get_param_value("session");
  return "default";
}

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void SendError(httplib::Response& res, ErrorCode code, const std::string& message) {
  SendJson(res, HttpStatusFor(code), json{{"code", ErrorCodeName(code)}, {"message", message}});
}

template <typename Fn>
httplib::Server::Handler Guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      SendError(res, e.code(), e.what());
    } catch (const std::exception& e) {
      SendJson(res, 500, json{{"code", "Internal"}, {"message", e.what()}});
    }
  };
}

json TaskPayload(const PairTask& task) {
  json j = json::parse(TaskToJsonLine(task));
  j["images"] = json{{"a", "/api/images/" + task.a.image_id},
                     {"b", "/api/images/" + task.b.image_id}};
  return j;
}

}  // namespace

HttpServer::HttpServer(AnnotationService& service) : impl_(new Impl{service, {}}) {
  AnnotationService& svc = impl_->service;
  httplib::Server& s = impl_->server;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type, X-Session"}});
  s.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  s.Get("/api/tasks/next", Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          SendJson(res, 200, TaskPayload(svc.NextTask(SessionOf(req))));
        }));
  s.Post(R"(/api/tasks/(.+)/label)",
         Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           json body;
           try {
             body = json::parse(req.body);
           } catch (const json::exception& e) {
             throw Error(ErrorCode::kParse, std::string("malformed body: ") + e.what());
           }
           if (!body.contains("t") || !body.at("t").is_number_integer()) {
             throw Error(ErrorCode::kInvalidLabel, "body must be {\"t\": -1|0|1}");
           }
           const std::string id = req.matches[1];
           svc.SubmitLabel(id, body.at("t").get<int>(), SessionOf(req));
           SendJson(res, 200, json{{"task_id", id}, {"status", "labeled"}});
         }));
  s.Post(R"(/api/tasks/(.+)/skip)",
         Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const std::string id = req.matches[1];
           svc.Skip(id, SessionOf(req));
           SendJson(res, 200, json{{"task_id", id}, {"status", "skipped"}});
         }));
  s.Post("/api/undo", Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
           const std::string id = svc.UndoLast(SessionOf(req));
           SendJson(res, 200, json{{"task_id", id}, {"status", "pending"}});
         }));
  s.Get("/api/progress", Guarded([&svc](const httplib::Request&, httplib::Response& res) {
          SendJson(res, 200, json::parse(svc.Progress().ToJson()));
        }));
  s.Get(R"(/api/images/(.+))", Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
          const DatasetManifest& m = svc.manifest();
          const ImageEntry& e = m.Get(std::string(req.matches[1]));
          res.status = 200;
          res.set_content(EncodePpm(ReadPpm(m.Resolve(e.path))), "image/x-portable-pixmap");
        }));
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

bool HttpServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::WaitUntilReady() const { impl_->server.wait_until_ready(); }

}  // namespace reltrav
