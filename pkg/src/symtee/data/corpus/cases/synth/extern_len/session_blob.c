#include <tee_internal_api.h>
#include "session_store.h"

TEE_Result store_session_blob(struct session_store *store, TEE_Param params[4])
{
    char blob[SESSION_BLOB_MAX];

    store->blob_len = params[0].memref.size;
    TEE_MemMove(blob, params[0].memref.buffer, store->blob_len);
    return TEE_SUCCESS;
}
