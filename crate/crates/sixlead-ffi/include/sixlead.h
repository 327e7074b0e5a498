/* C interface for sixlead: load trained lead models, evaluate them, and derive the frontal six-lead set. */

#ifndef SIXLEAD_H
#define SIXLEAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible entry point.
 */
typedef enum SixleadStatus {
  SixleadStatus_Ok = 0,
  /*
   A required pointer argument was null.
   */
  SixleadStatus_NullArgument = 1,
  /*
   A string argument was not valid UTF-8.
   */
  SixleadStatus_InvalidUtf8 = 2,
  /*
   The model file could not be read.
   */
  SixleadStatus_IoError = 3,
  /*
   The model text did not parse.
   */
  SixleadStatus_ParseError = 4,
  /*
   Lengths or values were out of range.
   */
  SixleadStatus_InvalidArgument = 5,
} SixleadStatus;

/*
 Opaque handle to a loaded model.
 */
typedef struct SixleadModel SixleadModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Loads a model from a file written by the trainer.

 On success stores an owned handle in `*out`; release it with
 [`sixlead_model_free`].

 # Safety
 `path` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SixleadStatus sixlead_model_load(const char *path, struct SixleadModel **out);

/*
 Parses a model from its textual form.

 # Safety
 `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum SixleadStatus sixlead_model_from_text(const char *text, struct SixleadModel **out);

/*
 Releases a model handle. Null is a no-op.

 # Safety
 `model` must be a handle returned by this library, released at most
 once.
 */
void sixlead_model_free(struct SixleadModel *model);

/*
 Number of hidden neurons (active breakpoints) in the model.

 # Safety
 `model` must be a live handle returned by this library.
 */
uintptr_t sixlead_model_neuron_count(const struct SixleadModel *model);

/*
 Evaluates the model pointwise: millivolt samples in, millivolt
 predictions out. `input_mv` and `output_mv` must each hold `len`
 doubles and may not alias.

 # Safety
 `model` must be a live handle; both buffers must be valid for `len`
 doubles.
 */
enum SixleadStatus sixlead_model_predict(const struct SixleadModel *model,
                                         const double *input_mv,
                                         uintptr_t len,
                                         double *output_mv);

/*
 Derives leads III, aVR, aVL, aVF from Leads I and II. All buffers
 hold `len` doubles.

 # Safety
 Every pointer must be valid for `len` doubles; output buffers may not
 alias the inputs.
 */
enum SixleadStatus sixlead_derive_six(const double *lead_i,
                                      const double *lead_ii,
                                      uintptr_t len,
                                      double *out_iii,
                                      double *out_avr,
                                      double *out_avl,
                                      double *out_avf);

/*
 Library version as a static NUL-terminated string.
 */
const char *sixlead_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIXLEAD_H */
