# Service layer initialization
