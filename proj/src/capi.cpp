// extern "C" surface over the C++ core. Exceptions stop here.

#include "structdiag/structdiag.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "structdiag/cli.hpp"
#include "structdiag/enumerate.hpp"
#include "structdiag/error.hpp"
#include "structdiag/graph.hpp"
#include "structdiag/model.hpp"
#include "structdiag/operators.hpp"

struct sd_model {
  structdiag::StructuralModel model;
  std::vector<std::string> sorted_faults;
};

struct sd_id_set {
  std::vector<std::string> members;
};

struct sd_rg_list {
  std::vector<structdiag::RgResult> results;
};

namespace {

thread_local std::string last_error;

sd_status fail(sd_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
sd_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SD_OK;
  } catch (const structdiag::InputError& e) {
    return fail(SD_ERROR_INPUT, e.what());
  } catch (const structdiag::UnknownIdError& e) {
    return fail(SD_ERROR_INVALID_ARGUMENT, e.what());
  } catch (const structdiag::Error& e) {
    return fail(SD_ERROR_PRECONDITION, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SD_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SD_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(SD_ERROR_INTERNAL, "unknown error");
  }
}

std::vector<std::string> ids(const char* const* items, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (!items[i]) throw structdiag::UnknownIdError("null id");
    out.emplace_back(items[i]);
  }
  return out;
}

structdiag::EquationSet subset_or_all(const sd_model* m, const char* const* subset,
                                      std::size_t count) {
  if (!subset && count == 0) return m->model.all_equations();
  if (!subset) throw structdiag::UnknownIdError("null subset");
  return structdiag::EquationSet(ids(subset, count));
}

char* duplicate(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

sd_model* adopt(structdiag::StructuralModel model) {
  std::vector<std::string> faults = model.fault_ids();
  std::sort(faults.begin(), faults.end());
  return new sd_model{std::move(model), std::move(faults)};
}

}  // namespace

extern "C" {

const char* sd_version(void) { return "0.1.0"; }

const char* sd_last_error(void) { return last_error.c_str(); }

sd_status sd_model_parse(const char* text, size_t length, sd_model** out) {
  if (!text || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = adopt(structdiag::parse_model(std::string_view(text, length))); });
}

sd_status sd_model_load(const char* path, sd_model** out) {
  if (!path || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = adopt(structdiag::load_model(path)); });
}

void sd_model_free(sd_model* model) { delete model; }

const char* sd_model_name(const sd_model* model) {
  return model ? model->model.name().c_str() : nullptr;
}

size_t sd_model_equation_count(const sd_model* model) {
  return model ? model->model.equation_count() : 0;
}

const char* sd_model_equation_id(const sd_model* model, size_t index) {
  if (!model || index >= model->model.equation_count()) return nullptr;
  return model->model.equations()[index].id.c_str();
}

size_t sd_model_fault_count(const sd_model* model) {
  return model ? model->sorted_faults.size() : 0;
}

const char* sd_model_fault_id(const sd_model* model, size_t index) {
  if (!model || index >= model->sorted_faults.size()) return nullptr;
  return model->sorted_faults[index].c_str();
}

size_t sd_id_set_size(const sd_id_set* set) { return set ? set->members.size() : 0; }

const char* sd_id_set_member(const sd_id_set* set, size_t index) {
  if (!set || index >= set->members.size()) return nullptr;
  return set->members[index].c_str();
}

void sd_id_set_free(sd_id_set* set) { delete set; }

sd_status sd_overdetermined_part(const sd_model* model, const char* const* subset,
                                 size_t count, sd_id_set** out) {
  if (!model || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto s = structdiag::overdetermined_part(model->model, subset_or_all(model, subset, count));
    *out = new sd_id_set{s.members()};
  });
}

sd_status sd_mstar(const sd_model* model, const char* op, const char* const* subset,
                   size_t count, sd_id_set** out) {
  if (!model || !op || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& oper = structdiag::operator_by_name(op);
    auto s = structdiag::mstar(model->model, subset_or_all(model, subset, count), oper);
    *out = new sd_id_set{s.members()};
  });
}

sd_status sd_detectable_faults(const sd_model* model, const char* op, sd_id_set** out) {
  if (!model || !op || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto s = structdiag::detectable_faults(model->model, structdiag::operator_by_name(op));
    *out = new sd_id_set{s.members()};
  });
}

sd_status sd_isolable(const sd_model* model, const char* op, const char* const* from_mode,
                      size_t from_count, const char* const* wrt_mode, size_t wrt_count,
                      int* isolable, const char** witness) {
  if (!model || !op || !isolable || (!from_mode && from_count) || (!wrt_mode && wrt_count))
    return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto v = structdiag::isolability(
        model->model, structdiag::operator_by_name(op),
        structdiag::FaultSignature(ids(from_mode, from_count)),
        structdiag::FaultSignature(ids(wrt_mode, wrt_count)));
    *isolable = v.isolable ? 1 : 0;
    if (witness)
      *witness = v.witness ? model->model.equation(*v.witness).id.c_str() : nullptr;
  });
}

sd_status sd_find_rg(const sd_model* model, const char* op, sd_rg_list** out) {
  if (!model || !op || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto results = structdiag::find_irg(
        structdiag::find_rg(model->model, structdiag::operator_by_name(op)));
    *out = new sd_rg_list{std::move(results)};
  });
}

sd_status sd_find_mtes(const sd_model* model, sd_rg_list** out) {
  if (!model || !out) return fail(SD_ERROR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto list = std::make_unique<sd_rg_list>();
    for (const auto& set : structdiag::find_mtes(model->model)) {
      structdiag::RgResult r;
      r.set = set;
      r.signature = structdiag::faults_of(model->model, set);
      r.redundancy = structdiag::redundancy(model->model, set);
      list->results.push_back(std::move(r));
    }
    *out = list.release();
  });
}

size_t sd_rg_list_size(const sd_rg_list* list) { return list ? list->results.size() : 0; }

size_t sd_rg_set_size(const sd_rg_list* list, size_t index) {
  if (!list || index >= list->results.size()) return 0;
  return list->results[index].set.size();
}

const char* sd_rg_set_member(const sd_rg_list* list, size_t index, size_t member) {
  if (!list || index >= list->results.size()) return nullptr;
  const auto& m = list->results[index].set.members();
  return member < m.size() ? m[member].c_str() : nullptr;
}

size_t sd_rg_signature_size(const sd_rg_list* list, size_t index) {
  if (!list || index >= list->results.size()) return 0;
  return list->results[index].signature.size();
}

const char* sd_rg_signature_member(const sd_rg_list* list, size_t index, size_t member) {
  if (!list || index >= list->results.size()) return nullptr;
  const auto& m = list->results[index].signature.members();
  return member < m.size() ? m[member].c_str() : nullptr;
}

int sd_rg_irreducible(const sd_rg_list* list, size_t index) {
  if (!list || index >= list->results.size()) return 0;
  return list->results[index].irreducible ? 1 : 0;
}

size_t sd_rg_redundancy(const sd_rg_list* list, size_t index) {
  if (!list || index >= list->results.size()) return 0;
  return list->results[index].redundancy;
}

void sd_rg_list_free(sd_rg_list* list) { delete list; }

sd_status sd_run(const sd_run_config* config, char** out_text, char** err_text) {
  if (out_text) *out_text = nullptr;
  if (err_text) *err_text = nullptr;
  if (!config || !config->command || !config->model_path)
    return fail(SD_ERROR_INVALID_ARGUMENT, "config needs a command and a model path");

  structdiag::RunConfig cfg;
  auto command = structdiag::parse_command(config->command);
  if (!command)
    return fail(SD_ERROR_INPUT, std::string("unknown command '") + config->command + "'");
  cfg.command = *command;
  cfg.model_path = config->model_path;
  if (config->operator_name) cfg.operator_name = config->operator_name;
  if (!structdiag::OperatorRegistry::builtin().contains(cfg.operator_name))
    return fail(SD_ERROR_INPUT, "unknown operator '" + cfg.operator_name + "'");
  if (config->format) {
    auto format = structdiag::parse_format(config->format);
    if (!format)
      return fail(SD_ERROR_INPUT, std::string("unknown format '") + config->format + "'");
    cfg.format = *format;
  }
  if (config->oracle_bound) cfg.oracle_bound = config->oracle_bound;
  if (config->from_mode) cfg.from_mode = structdiag::split_id_list(config->from_mode);
  if (config->wrt_mode) cfg.wrt_mode = structdiag::split_id_list(config->wrt_mode);
  for (size_t i = 0; i < config->residual_set_count; ++i) {
    if (!config->residual_sets || !config->residual_sets[i])
      return fail(SD_ERROR_INVALID_ARGUMENT, "null residual set");
    cfg.residual_sets.push_back(structdiag::split_id_list(config->residual_sets[i]));
  }
  if (config->target_fault) cfg.target_fault = config->target_fault;

  structdiag::RunOutcome outcome;
  sd_status copied = guarded([&] {
    outcome = structdiag::execute(cfg);
    if (out_text) *out_text = duplicate(outcome.out);
    if (err_text) *err_text = duplicate(outcome.err);
  });
  if (copied != SD_OK) return copied;
  if (outcome.exit_status != 0) last_error = outcome.err;
  return static_cast<sd_status>(outcome.exit_status);
}

void sd_string_free(char* text) { std::free(text); }

}  // extern "C"
