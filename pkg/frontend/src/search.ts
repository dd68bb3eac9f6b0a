/** Look up archived experiments by their 16-character ID. */

export const ID_PATTERN = /^[A-Z0-9]{16}$/;

/** Normalize user input to a valid experiment ID, or null with no guess.
 * Lowercase letters are accepted and upcased; anything else malformed
 * stays the caller's problem to report. */
export function normalizeExperimentId(raw: string): string | null {
  const candidate = raw.trim().toUpperCase();
  return ID_PATTERN.test(candidate) ? candidate : null;
}

export const ID_FORMAT_HINT =
  "an experiment ID is 16 characters, letters A-Z and digits only";
