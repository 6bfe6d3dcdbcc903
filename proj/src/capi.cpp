#include "svrgol/svrgol.h"

#include <string>

#include "svrgol/errors.hpp"
#include "svrgol/eval.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

}  // namespace

struct svrgol_config {
  svrgol::RunConfig cfg;
};

extern "C" {

svrgol_config* svrgol_config_new(void) {
  g_last_error.clear();
  try {
    return new svrgol_config();
  } catch (...) {
    set_error("out of memory");
    return nullptr;
  }
}

void svrgol_config_free(svrgol_config* cfg) { delete cfg; }

int svrgol_config_set(svrgol_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return SVRGOL_ERR_USAGE;
  }
  try {
    svrgol::set_config_key(cfg->cfg, key, value);
    return SVRGOL_OK;
  } catch (const svrgol::UsageError& e) {
    set_error(e.what());
    return SVRGOL_ERR_USAGE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SVRGOL_ERR_INTERNAL;
  }
}

int svrgol_config_load_file(svrgol_config* cfg, const char* path) {
  if (!cfg || !path) {
    set_error("null argument");
    return SVRGOL_ERR_USAGE;
  }
  try {
    svrgol::load_config_file(cfg->cfg, path);
    return SVRGOL_OK;
  } catch (const svrgol::UsageError& e) {
    set_error(e.what());
    return SVRGOL_ERR_USAGE;
  } catch (const svrgol::IoError& e) {
    set_error(e.what());
    return SVRGOL_ERR_IO;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SVRGOL_ERR_INTERNAL;
  }
}

int svrgol_run_experiment(const svrgol_config* cfg) {
  if (!cfg) {
    set_error("null config");
    return SVRGOL_ERR_USAGE;
  }
  std::string error;
  int code = SVRGOL_ERR_INTERNAL;
  try {
    code = svrgol::run_experiment(cfg->cfg, &error);
  } catch (const std::exception& e) {
    error = e.what();
  }
  set_error(code == 0 ? "" : error);
  return code;
}

const char* svrgol_last_error(void) { return g_last_error.c_str(); }

const char* svrgol_strerror(int code) {
  switch (code) {
    case SVRGOL_OK:
      return "ok";
    case SVRGOL_ERR_USAGE:
      return "invalid configuration";
    case SVRGOL_ERR_IO:
      return "input/output error";
    case SVRGOL_ERR_DIVERGED:
      return "optimizer diverged";
    default:
      return "internal error";
  }
}

const char* svrgol_version(void) { return "0.1.0"; }

}  // extern "C"
