#include <tee_internal_api.h>

#define SDP_IV_LEN 16

static uint8_t sdp_iv[SDP_IV_LEN];

static TEE_Result sdp_update_iv(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	uint32_t ivlen = params[2].memref.size;

	(void)types;
	if (!ivlen)
		return TEE_ERROR_BAD_PARAMETERS;

	TEE_MemMove(sdp_iv, params[2].memref.buffer, ivlen);
	return TEE_SUCCESS;
}
