"""Rule chains that assign a traffic device interaction category to a segment."""
