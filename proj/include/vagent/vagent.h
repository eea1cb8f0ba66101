/* C interface to the vagent orchestration server. */
#ifndef VAGENT_VAGENT_H
#define VAGENT_VAGENT_H

#include <stdint.h>

#if defined(VAGENT_BUILDING_LIBRARY)
#define VAGENT_API __attribute__((visibility("default")))
#else
#define VAGENT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vagent_status {
  VAGENT_OK = 0,
  VAGENT_ERR_INVALID_ARGUMENT = 1,
  VAGENT_ERR_CONFIG = 2,
  VAGENT_ERR_BIND = 3,
  VAGENT_ERR_CLIP_LIBRARY = 4,
  VAGENT_ERR_SCRIPT_PARSE = 5,
  VAGENT_ERR_INVALID_PERSONA = 6,
  VAGENT_ERR_INTERNAL = 7
} vagent_status;

typedef struct vagent_server vagent_server;

/* Message for the most recent failure on the calling thread; never NULL. */
VAGENT_API const char* vagent_last_error(void);
VAGENT_API const char* vagent_version(void);

/* Strings returned through out-parameters must be released with this. */
VAGENT_API void vagent_string_free(char* s);

/* Loads a clip library. *report receives "OK, 7 emotions, N clips" or one
   line per problem. Returns VAGENT_ERR_CLIP_LIBRARY when invalid. */
VAGENT_API vagent_status vagent_validate_clips(const char* path, char** report);

/* Replays a scripted conversation with mock providers; *transcript receives
   the printed session. */
VAGENT_API vagent_status vagent_replay(const char* script_path, const char* config_path, uint64_t seed,
                                       char** transcript);

/* Loads the config and binds the listening socket. */
VAGENT_API vagent_status vagent_server_create(const char* config_path, vagent_server** out);
VAGENT_API vagent_status vagent_server_start(vagent_server* server);
VAGENT_API uint16_t vagent_server_port(const vagent_server* server);
/* Closes every session with ServerShutdown. Safe to call from any thread. */
VAGENT_API vagent_status vagent_server_shutdown(vagent_server* server);
/* Blocks until shutdown has completed. */
VAGENT_API vagent_status vagent_server_wait(vagent_server* server);
VAGENT_API void vagent_server_destroy(vagent_server* server);

#ifdef __cplusplus
}
#endif

#endif
