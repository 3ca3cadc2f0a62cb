#include <string.h>
#include <tee_internal_api.h>

static char sdp_log[512];

static TEE_Result sdp_append(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	(void)types;
	memcpy(sdp_log, params[0].memref.buffer, params[0].memref.size);
	return TEE_SUCCESS;
}
