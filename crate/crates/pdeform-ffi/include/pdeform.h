#ifndef PDEFORM_H
#define PDEFORM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every entry point.
typedef enum PdeformStatus {
  PDEFORM_STATUS_OK = 0,
  // A required pointer argument was null.
  PDEFORM_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  PDEFORM_STATUS_INVALID_UTF8 = 2,
  // The scenario text does not follow the grammar.
  PDEFORM_STATUS_SYNTAX = 3,
  // The scenario names an undefined object.
  PDEFORM_STATUS_UNRESOLVED_REFERENCE = 4,
  // The command name is not one of the supported commands.
  PDEFORM_STATUS_UNKNOWN_COMMAND = 5,
  // A construction refused because its rank hypothesis fails.
  PDEFORM_STATUS_HYPOTHESIS_FAILED = 6,
  // The monomial window is too small for an exact answer.
  PDEFORM_STATUS_WINDOW_INSUFFICIENT = 7,
  // Any other error reported by the engine.
  PDEFORM_STATUS_ENGINE = 8,
  // The engine panicked; this is a bug.
  PDEFORM_STATUS_INTERNAL = 9,
} PdeformStatus;

// Parsed scenario. Opaque to C callers.
typedef struct PdeformScenario PdeformScenario;

// Options of [`pdeform_run`]. Negative `window` or `order` select the
// scenario default; `seed` is used only when `has_seed` is true.
typedef struct PdeformOptions {
  int32_t window;
  int32_t order;
  uint64_t seed;
  bool has_seed;
  bool json;
} PdeformOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *pdeform_version(void);

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into the library on the same thread.
const char *pdeform_last_error(void);

// Parse scenario text into a new handle stored in `*out`.
//
// # Safety
// `text` must be a nul-terminated string and `out` a valid pointer.
enum PdeformStatus pdeform_scenario_parse(const char *text, struct PdeformScenario **out);

// Canonical text of a scenario, stored in `*out`; free it with
// [`pdeform_string_free`].
//
// # Safety
// `scenario` must come from [`pdeform_scenario_parse`] and `out` be valid.
enum PdeformStatus pdeform_scenario_serialize(const struct PdeformScenario *scenario, char **out);

// Release a scenario handle. Null is ignored.
//
// # Safety
// `scenario` must come from [`pdeform_scenario_parse`] and not be used again.
void pdeform_scenario_free(struct PdeformScenario *scenario);

// Run one command against a scenario. On success `*report` receives the
// text (or JSON) report and `*exit` the command's exit code: 0 for a
// positive answer, 1 for invalid input or failed validation, 2 for a
// negative mathematical answer. On an engine error `*exit` still receives
// the exit code the command line tool would use and `*report` is null.
// `options` may be null for the scenario defaults.
//
// # Safety
// Pointers must be valid; `command` must be nul-terminated.
enum PdeformStatus pdeform_run(const struct PdeformScenario *scenario,
                               const char *command,
                               const struct PdeformOptions *options,
                               char **report,
                               int32_t *exit);

// Release a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used again.
void pdeform_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDEFORM_H */
