/* Secure data path TA: inject a clear payload into the secure buffer. */
#include <tee_internal_api.h>
#include <tee_internal_api_extensions.h>

#define SDP_BUFFER_SIZE 1024

static uint8_t sdp_secure_buf[SDP_BUFFER_SIZE];
static size_t sdp_secure_len;

static TEE_Result sdp_inject(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	const uint32_t exp = TEE_PARAM_TYPES(TEE_PARAM_TYPE_MEMREF_INPUT,
					     TEE_PARAM_TYPE_NONE,
					     TEE_PARAM_TYPE_NONE,
					     TEE_PARAM_TYPE_NONE);

	if (types != exp)
		return TEE_ERROR_BAD_PARAMETERS;

	TEE_MemMove(sdp_secure_buf, params[0].memref.buffer, params[0].memref.size);
	sdp_secure_len = params[0].memref.size;

	return TEE_SUCCESS;
}

static TEE_Result sdp_inject_header(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	uint8_t hdr[32];

	if (types != TEE_PARAM_TYPES(TEE_PARAM_TYPE_MEMREF_INPUT, TEE_PARAM_TYPE_NONE,
				     TEE_PARAM_TYPE_NONE, TEE_PARAM_TYPE_NONE))
		return TEE_ERROR_BAD_PARAMETERS;
	if (params[0].memref.size > sizeof(hdr))
		return TEE_ERROR_SHORT_BUFFER;

	TEE_MemMove(hdr, params[0].memref.buffer, params[0].memref.size);
	return TEE_SUCCESS;
}
