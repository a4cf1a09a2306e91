/**
 * Wire types for the /api JSON contract, mirrored field-for-field.
 */
export {};
